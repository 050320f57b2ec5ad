import itertools

import pytest
from hypothesis import given, settings, strategies as st

from abstractis.abstraction import (
    AbstractionError,
    AbstractionSpec,
    build_abstraction,
    least_representatives,
    verify_equivalence,
    verify_principle,
)
from abstractis.structures.definable import BudgetExceeded
from abstractis.structures.model import SOStructure, powerset_family
from abstractis.structures.schemas import check_schema, injection_search

AB = ["a", "b"]
EMPTY = frozenset()
FULL = frozenset({("a",), ("b",)})


@pytest.fixture
def pab():
    return SOStructure(AB, {1: powerset_family(AB)})


def test_equivalence_checks(pab):
    assert verify_equivalence(pab, AbstractionSpec("equality")).holds
    assert verify_equivalence(pab, AbstractionSpec("equinumerosity")).holds
    v = verify_equivalence(pab, AbstractionSpec("forall x. X(x) -> Y(x)"))
    assert v.fails
    assert v.witness == {"property": "symmetry", "concepts": [EMPTY, FULL]}


def test_formula_may_not_mention_operators():
    with pytest.raises(AbstractionError):
        AbstractionSpec("ext1(X) = ext1(Y)")
    with pytest.raises(AbstractionError):
        AbstractionSpec("X(x) <-> Y(x)")


def test_fresh_objects_for_equinumerosity(pab):
    T = build_abstraction(pab, [AbstractionSpec("equinumerosity")])
    fresh = [o for o in T.objects if o not in AB]
    assert len(fresh) == 3
    table = T.ext[0].table
    assert table[frozenset({("a",)})] == table[frozenset({("b",)})]
    assert verify_principle(T, 1, AbstractionSpec("equinumerosity")).holds


def test_fresh_objects_extend_the_order():
    S = SOStructure(AB, {1: powerset_family(AB)}, order=["b", "a"])
    T = build_abstraction(S, [AbstractionSpec("equality")])
    assert T.order[:2] == ("b", "a") and len(T.order) == 6


def test_reuse_mode():
    S = SOStructure(AB, {1: [EMPTY, FULL]})
    T = build_abstraction(S, [AbstractionSpec("equality", mode="reuse", iota={EMPTY: "a", FULL: "b"})])
    assert T.objects == ("a", "b")
    assert check_schema(T, "blv").holds


def test_reuse_mode_needs_injective_iota():
    S = SOStructure(AB, {1: [EMPTY, FULL]})
    with pytest.raises(AbstractionError):
        build_abstraction(S, [AbstractionSpec("equality", mode="reuse", iota={EMPTY: "a", FULL: "a"})])


def test_no_specs_leaves_structure_alone(pab):
    assert build_abstraction(pab, []) is pab


def test_hand_built_operators_fail():
    fam = powerset_family(AB)
    merged = SOStructure(AB, {1: fam}, ext=[(1, {c: "a" for c in fam})])
    v = verify_principle(merged, 1, AbstractionSpec("equinumerosity"))
    assert v.fails and v.witness["reason"] == "merges inequivalent concepts"
    split = SOStructure(AB + ["c", "d"], {1: fam}, ext=[(1, dict(zip(fam, ["a", "b", "c", "d"])))])
    v = verify_principle(split, 1, AbstractionSpec("equinumerosity"))
    assert v.fails


def test_joint_construction(pab):
    names = ["equality", "equinumerosity", "same_symmetric_difference_parity"]
    T = build_abstraction(pab, [AbstractionSpec(n) for n in names])
    assert len(T.ext) == 3
    assert all(verify_principle(T, i, AbstractionSpec(n)).holds for i, n in enumerate(names, start=1))


def test_reclose_breaks_total_blv(pab):
    T = build_abstraction(pab, [AbstractionSpec("equality")], reclose=True)
    assert len(T.concepts[1]) == 2 ** len(T.objects)
    v = check_schema(T, "blv")
    assert "partiality" in v.flags
    assert check_schema(T, "blv", on_domain=False).fails
    with pytest.raises(BudgetExceeded):
        injection_search(list(T.concepts[1]), list(T.objects))


def test_formula_equivalence_is_classified(pab):
    spec = AbstractionSpec("forall x. (X(x) <-> Y(x))")
    assert spec.describe()["class"] == "FO"
    assert AbstractionSpec("equality").describe()["E"] == "semantic E"
    T = build_abstraction(pab, [spec])
    assert check_schema(T, "blv").holds


partitions = st.integers(0, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 3), min_size=2 ** n, max_size=2 ** n))
)


@settings(max_examples=60, deadline=None)
@given(partitions)
def test_random_partitions(data):
    n, labels = data
    objs = list(range(n))
    fam = powerset_family(objs)
    block = dict(zip(fam, labels))
    spec = AbstractionSpec(lambda X, Y: block[X] == block[Y], name="block")
    S = SOStructure(objs, {1: fam})
    ell = least_representatives(S, spec)
    for X in fam:
        assert ell[ell[X]] == ell[X]
        assert block[ell[X]] == block[X]
    T = build_abstraction(S, [spec])
    assert len(T.objects) - n == len(set(labels))
    assert verify_principle(T, 1, spec).holds
    table = T.ext[0].table
    for X, Y in itertools.product(fam, repeat=2):
        assert (table[X] == table[Y]) == (block[X] == block[Y])
