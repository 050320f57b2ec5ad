import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from abstractis.fixtures import fixture
from abstractis.logic.parser import parse
from abstractis.newv import newv_structure
from abstractis.structures.definable import (
    code_surjection,
    definable_closure,
    definable_relations,
    defn_iterate,
    theta,
)
from abstractis.structures.evaluate import EvaluationError, evaluate
from abstractis.structures.model import (
    ExtUndefinedError,
    SOStructure,
    StructureError,
    members,
    powerset_family,
)
from abstractis.structures.schemas import check_schema
from abstractis.structures.uniformize import right_inverse, uniformize


@pytest.fixture
def running():
    return fixture("von-neumann-012")


def test_running_structure_satisfies_blv(running):
    assert evaluate(running, parse("forall X. forall Y. (ext1(X) = ext1(Y) <-> X == Y)")) is True
    assert evaluate(running, parse("forall x. x = x")) is True
    assert evaluate(running, parse("exists X:1. ext1(X) = 2 & X(1)")) is True


def test_partial_operator_is_an_error():
    S = SOStructure([0, 1], {1: powerset_family([0, 1])}, ext=[(1, {frozenset(): 0})])
    with pytest.raises(ExtUndefinedError):
        evaluate(S, parse("forall X. ext1(X) = 0"))


def test_assignment_must_cover_free_variables(running):
    with pytest.raises(EvaluationError):
        evaluate(running, parse("x = y"), {"x": 0})
    assert evaluate(running, parse("X(x)"), {"x": 0, "X": {0}}) is True


def test_non_injective_operator_is_reported():
    # abstraction operators for coarse equivalences merge concepts, so this is allowed
    S = SOStructure([0], {1: [frozenset(), frozenset({(0,)})]}, ext=[(1, {frozenset(): 0, frozenset({(0,)}): 0})])
    assert not S.ext[0].is_injective()
    v = check_schema(S, "blv")
    assert v.fails
    assert evaluate(S, parse(v.witness["replay"]), v.witness["assignment"]) is True


def test_structure_rejects_duplicate_concepts():
    with pytest.raises(StructureError):
        SOStructure([0], {1: [frozenset(), frozenset()]})


def unary_sets(S, policy):
    return {members(r) for r in definable_relations(S, 1, policy).relations()}


def test_pure_two_element_definables():
    P = SOStructure(["a", "b"], {})
    assert unary_sets(P, "none") == {frozenset(), frozenset({"a", "b"})}
    assert unary_sets(P, "all") == set(oracles.powerset(["a", "b"]))


def test_empty_structure_definables():
    E = SOStructure([], {})
    assert [len(definable_relations(E, n, "none")) for n in (1, 2)] == [1, 1]


@pytest.mark.parametrize("name", ["von-neumann-012", "two-cycle", "non-extensional", "with-binary-witness"])
def test_parameter_free_definables_are_automorphism_invariant(name):
    S = fixture(name)
    assert unary_sets(S, "none") <= set(oracles.invariant_subsets(S))


@pytest.mark.parametrize("name", ["von-neumann-012", "quine-atom", "non-extensional", "three-cycle"])
def test_definable_family_is_boolean_closed(name):
    S = fixture(name)
    for arity in (1, 2):
        fam = definable_relations(S, arity, "none")
        rels = set(fam.relations())
        universe = frozenset(itertools.product(S.objects, repeat=arity))
        assert frozenset() in rels and universe in rels
        for a in rels:
            assert universe - a in rels
            for b in rels:
                assert a & b in rels
        if arity == 2:
            unary = set(definable_relations(S, 1, "none").relations())
            assert {frozenset((t[0],) for t in r) for r in rels} <= unary
            assert frozenset((a, a) for a in S.objects) in rels


def test_defn_iterate():
    levels = defn_iterate([], 3, params="all")
    assert [lv.size for lv in levels] == [0, 1, 2, 4]
    assert defn_iterate([], 0)[0].size == 0
    free = defn_iterate([], 3, params="none")
    assert all(lv.size <= lv.powerset_size for lv in free)


def test_definable_closure(running):
    P = SOStructure(["a", "b"], {})
    assert definable_closure(running, (), 3) == frozenset(running.objects)
    assert definable_closure(P, (), 3) == frozenset()
    assert definable_closure(P, ("a", "b"), 1) == frozenset({"a", "b"})
    assert definable_closure(P, ("a",), 2) == frozenset({"a", "b"})


def test_definable_closure_is_monotone():
    S = fixture("two-cycle")
    small = definable_closure(S, (), 2)
    assert small <= definable_closure(S, (), 3)
    assert small <= definable_closure(S, tuple(S.objects[:1]), 2)


def test_code_surjection(running):
    cs = code_surjection(running, 3)
    assert not cs.uncovered
    assert set(cs.iota) == set(running.objects)
    assert len(set(cs.iota.values())) == len(cs.iota)
    for a, code in cs.iota.items():
        assert cs.theta[code] == a
    assert set(cs.theta.values()) == definable_closure(running, (), 3)
    assert theta(running, parse("exists X:1.(ext1(X)=x & forall y. not X(y))")) == 0
    assert theta(running, parse("x = x")) is None


def test_code_surjection_lists_uncovered():
    P = SOStructure(["a", "b"], {})
    cs = code_surjection(P, 2)
    assert set(cs.uncovered) == {"a", "b"} and not cs.iota


def test_uniformize_examples():
    assert uniformize({(0, "a"), (0, "b"), (1, "b")}, order=["a", "b"]) == {(0, "a"), (1, "b")}
    assert uniformize({(0, "b"), (1, "a")}) == {(0, "b"), (1, "a")}
    assert uniformize(set()) == frozenset()
    assert uniformize({(0, 5), (0, 2)}, order=lambda y: -y) == {(0, 5)}


@given(st.sets(st.tuples(st.integers(0, 5), st.integers(0, 9)), max_size=25))
def test_uniformize_is_least_witness(R):
    U = uniformize(R)
    assert U == oracles.least_witness(R)
    assert {x for x, _ in U} == {x for x, _ in R}
    assert len(U) == len({x for x, _ in U})


def test_right_inverse():
    f = {"a": 1, "b": 1, "c": 2}
    g = right_inverse(f, order=["c", "b", "a"])
    assert g == {1: "b", 2: "c"}
    assert all(f[g[y]] == y for y in g)


# --- schema checks


def test_running_structure_schemas(running):
    assert check_schema(running, "blv").holds
    v = check_schema(running, "fullcomp")
    assert v.fails and v.witness["relation"] == frozenset({(1,)})
    assert evaluate(running, parse(v.witness["replay"])) is True


def test_pigeonhole():
    S = SOStructure([0, 1], {1: powerset_family([0, 1])})
    v = check_schema(S, "blv")
    assert v.fails and v.witness["pigeonhole"] == {"concepts": 4, "objects": 2}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.data())
def test_focomp_with_parameters_iff_full(n, data):
    objs = list(range(n))
    full = powerset_family(objs, 1)
    fam = data.draw(st.lists(st.sampled_from(full), unique=True, min_size=0))
    S = SOStructure(objs, {1: fam})
    v = check_schema(S, "focomp", params="all", arities=(1,))
    assert v.holds == (set(fam) == set(full))
    if v.fails:
        assert evaluate(S, parse(v.witness["replay"])) is True


def test_gc_least_witness():
    S = SOStructure([0, 1, 2], {1: powerset_family([0, 1, 2])}, order=[2, 0, 1])
    assert check_schema(S, "gc").holds


def test_lazy_backend_gives_unknown():
    v = check_schema(newv_structure(0), "focomp")
    assert v.status == "Unknown"


def test_verdict_json_shape(running):
    data = check_schema(running, "fullcomp").to_json()
    assert {"schema", "status", "witness", "bound", "elapsed"} <= set(data)


def test_random_structures_agree_with_oracle_on_sentences():
    rng = random.Random(5)
    sentences = [
        parse(t)
        for t in [
            "forall X. exists x. X(x) | X == X",
            "exists X. forall Y. (X == Y | exists x. (X(x) & not Y(x)))",
            "forall x. exists X. X(x) & ext1(X) = x",
            "forall X. forall Y. (ext1(X) = ext1(Y) -> X == Y)",
        ]
    ]
    for _ in range(50):
        objs = list(range(rng.randint(1, 3)))
        fam = [c for c in powerset_family(objs) if rng.random() < 0.6]
        table = {}
        used = set()
        for c in fam:
            free = [o for o in objs if o not in used]
            if free and rng.random() < 0.8:
                table[c] = rng.choice(free)
                used.add(table[c])
        S = SOStructure(objs, {1: fam}, ext=[(1, table)])
        for f in sentences:
            try:
                got = evaluate(S, f)
            except ExtUndefinedError:
                got = "undefined"
            assert got == oracles.outcome(lambda: oracles.holds(S, f, {}))


def replays(S, v):
    return evaluate(S, parse(v.witness["replay"]), v.witness.get("assignment")) is True


def test_failing_choice_is_replayable():
    S = fixture("von-neumann-012")
    v = check_schema(S, "sigma11choice")
    assert v.fails and replays(S, v)

