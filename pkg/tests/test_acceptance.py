import itertools
import random
import time

import oracles
from abstractis.abstraction import BUILTIN_ORACLES, AbstractionSpec, build_abstraction, verify_principle
from abstractis.extraction import (
    collapse_inner_model,
    embed_j,
    eta_members,
    tau_closure,
    trcl_eta_meta,
    wf_ext,
)
from abstractis.fixtures import FIXTURES, corpus
from abstractis.hf import FiniteRelation, is_transitive_family, mostowski_collapse
from abstractis.logic.enumerate import Signature, enumerate_formulas
from abstractis.newv import check_newv, newv_structure, verify_inner_model
from abstractis.structures.definable import code_surjection, defn_iterate, definable_relations, theta
from abstractis.structures.evaluate import compile_formula
from abstractis.structures.model import ExtUndefinedError, SOStructure, members, powerset_family
from abstractis.structures.schemas import check_schema
from abstractis.structures.uniformize import uniformize


# --- 1: compiled evaluator against the recursive oracle


def _rels(objs, arity):
    return powerset_family(objs, arity)


def _structures_unary_constant():
    for n in range(1, 5):
        objs = list(range(n))
        for P in _rels(objs, 1):
            yield SOStructure(objs, {}, constants={"P": (1, P)})


def _structures_concepts():
    rng = random.Random(1)
    for n in range(1, 5):
        objs = list(range(n))
        full = _rels(objs, 1)
        yield SOStructure(objs, {1: full})
        yield SOStructure(objs, {1: rng.sample(full, min(len(full), 3))})


def _structures_small_concepts():
    for n in range(1, 4):
        objs = list(range(n))
        yield SOStructure(objs, {1: _rels(objs, 1)})


def _structures_binary():
    rng = random.Random(2)
    for n in range(1, 4):
        objs = list(range(n))
        pairs = list(itertools.product(objs, repeat=2))
        for _ in range(4):
            R = frozenset(p for p in pairs if rng.random() < 0.4)
            yield SOStructure(objs, {2: _rels(objs, 2) if n <= 2 else [R]}, constants={"R": (2, R)})


def _structures_order():
    rng = random.Random(3)
    for n in (2, 3):
        objs = list(range(n))
        full = _rels(objs, 1)
        yield SOStructure(objs, {1: rng.sample(full, 4)}, order=list(reversed(objs)))


def _structures_ext():
    A, B, C = frozenset(), frozenset({(0,)}), frozenset({(0,), (1,)})
    # ext is undefined on C, so both outcomes of the short circuit are exercised
    yield SOStructure([0, 1, 2], {1: [A, B, C]}, constants={"P": (1, B)}, ext=[(1, {A: 2, B: 1})])


SIGNATURES = [
    (Signature(object_vars=("x",), concept_consts=(("P", 1),), connectives=("not", "and"),
               quantifiers=("exists",), concept_equality=False), _structures_unary_constant),
    (Signature(object_vars=("x",), concept_vars=(("X", 1),), connectives=("not", "and"),
               quantifiers=("exists",), concept_equality=False), _structures_concepts),
    (Signature(object_vars=("x",), concept_consts=(("R", 2),), applications=True, connectives=("not", "or"),
               quantifiers=("forall",), concept_equality=False), _structures_binary),
    (Signature(object_vars=("x",), concept_vars=(("X", 1),), order=True, connectives=("implies",),
               quantifiers=("forall",)), _structures_order),
    (Signature(object_vars=("x",), concept_vars=(("X", 1),), connectives=("iff",),
               quantifiers=("exists", "forall")), _structures_small_concepts),
    (Signature(object_vars=("x",), concept_consts=(("P", 1),), ext_arities=(1,), connectives=("not", "and"),
               quantifiers=("exists",), concept_equality=False), _structures_ext),
]


def _assignments(S, free_objs, free_concepts):
    keys = [(v, 0) for v in sorted(free_objs)] + sorted(free_concepts)
    domains = [S.objects if a == 0 else S.concepts.get(a, ()) for _, a in keys]
    for values in itertools.product(*domains):
        yield {(k if a == 0 else (k, a)): v for (k, a), v in zip(keys, values)}


def test_evaluator_matches_recursive_oracle(criterion):
    from abstractis.logic.syntax import free_variables

    start = time.perf_counter()
    checked = discrepancies = 0
    example = None
    for sig, structures in SIGNATURES:
        formulas = list(enumerate_formulas(sig, 4))
        frees = [free_variables(f) for f in formulas]
        for S in structures():
            for f, (objs, cons) in zip(formulas, frees):
                cons = {c for c in cons if c[0] not in S.constants}
                run = compile_formula(f, S)
                for env in _assignments(S, objs, cons):
                    try:
                        got = run(dict(env))
                    except ExtUndefinedError:
                        got = "undefined"
                    want = oracles.outcome(lambda: oracles.holds(S, f, env))
                    checked += 1
                    if got != want:
                        discrepancies += 1
                        example = example or (f, env)
    elapsed = time.perf_counter() - start
    ok = discrepancies == 0 and elapsed < 60
    criterion(1, ok, elapsed, f"{checked} evaluations, {discrepancies} discrepancies")
    assert discrepancies == 0, example
    assert elapsed < 60


# --- 2: construction of abstraction operators


def test_construction_yields_every_principle(criterion):
    start = time.perf_counter()
    runs = 0
    failures = []
    for n in (2, 3):
        objs = list(range(n))
        S = SOStructure(objs, {1: powerset_family(objs, 1)})
        groups = [[name] for name in BUILTIN_ORACLES] + [list(BUILTIN_ORACLES)]
        for group in groups:
            specs = [AbstractionSpec(name) for name in group]
            T = build_abstraction(S, specs, verify=False)
            for i, spec in enumerate(specs, start=1):
                runs += 1
                v = verify_principle(T, i, spec)
                if not v.holds:
                    failures.append((n, group, spec.name, v.witness))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10
    criterion(2, ok, elapsed, f"{runs} principle checks, {len(failures)} failures")
    assert not failures
    assert elapsed < 10


# --- 3: no injective extension operator on two objects


def test_two_objects_have_no_injective_extension(criterion):
    start = time.perf_counter()
    objs = [0, 1]
    S = SOStructure(objs, {1: powerset_family(objs, 1)})
    maps = list(itertools.product(objs, repeat=4))
    injective = [m for m in maps if len(set(m)) == 4]
    v = check_schema(S, "blv")
    elapsed = time.perf_counter() - start
    ok = (
        not injective
        and v.fails
        and v.witness["pigeonhole"] == {"concepts": 4, "objects": 2}
        and v.bound == {"maps": 16, "injective": 0}
        and elapsed < 1
    )
    criterion(3, ok, elapsed, f"{len(maps)} maps, {len(injective)} injective, verdict {v.status}")
    assert not injective
    assert v.fails and v.witness["pigeonhole"] == {"concepts": 4, "objects": 2}
    assert v.bound == {"maps": 16, "injective": 0}
    assert elapsed < 1


# --- 4: Mostowski collapse on random relations


def random_extensional_dag(rng, size):
    nodes, edges, seen = [], set(), set()
    while len(nodes) < size:
        below = frozenset(b for b in nodes if rng.random() < 0.35)
        if below in seen:
            if len(seen) >= 2 ** len(nodes):
                break
            continue
        seen.add(below)
        name = f"n{len(nodes)}"
        edges |= {(b, name) for b in below}
        nodes.append(name)
    labels = nodes[:]
    rng.shuffle(labels)
    return FiniteRelation(tuple(labels), frozenset(edges))


def test_collapse_is_isomorphism_onto_transitive_family(criterion):
    start = time.perf_counter()
    rng = random.Random(20240)
    failures = 0
    for _ in range(1000):
        R = random_extensional_dag(rng, rng.randint(1, 12))
        pi = mostowski_collapse(R)
        want = oracles.collapse(R.nodes, R.edges)
        image = set(pi.values())
        ok = pi == want and len(image) == len(R.nodes) and is_transitive_family(image)
        ok = ok and all(((a, b) in R.edges) == (pi[a] in pi[b]) for a in R.nodes for b in R.nodes)
        failures += not ok
    elapsed = time.perf_counter() - start
    criterion(4, failures == 0 and elapsed < 30, elapsed, f"1000 relations, {failures} failures")
    assert failures == 0
    assert elapsed < 30


# --- 5: identification on the fixture corpus


def test_identification_on_fixture_corpus(criterion):
    start = time.perf_counter()
    structures = corpus()
    problems = []
    inversions = 0
    for S in structures:
        meta = set(wf_ext(S, "meta").members)
        concept = set(wf_ext(S, "concept").members)
        if not meta <= concept:
            problems.append((S.name, "inclusion", meta - concept))
        table = S.ext[0].table
        injective = len(set(table.values())) == len(table)
        for U, b in table.items():
            if tau_closure(S, eta_members(S, b)) != trcl_eta_meta(S, b):
                problems.append((S.name, "tau", U))
            if injective and tau_closure(S, U) != trcl_eta_meta(S, b):
                problems.append((S.name, "tau literal", U))
        im = collapse_inner_model(S, "meta")
        if im.extensional and not im.uncollapsed:
            rank = max((s.rank for s in im.collapse.values()), default=0)
            j = embed_j(S, rank)
            for x, s in im.collapse.items():
                inversions += 1
                if j.get(s) != x:
                    problems.append((S.name, "j(pi(x))", x))
            for s, x in j.mapping.items():
                inversions += 1
                if im.collapse.get(x) is not s:
                    problems.append((S.name, "pi(j(s))", s))
    elapsed = time.perf_counter() - start
    names = {S.name for S in structures}
    ok = not problems and len(structures) >= 20 and elapsed < 10
    criterion(5, ok, elapsed, f"{len(structures)} structures, {inversions} inversion checks, {len(problems)} problems")
    assert len(structures) >= 20
    assert {"von-neumann-012", "quine-atom", "non-extensional"} <= names
    assert any(not FIXTURES[n].extensional for n in names)
    assert not problems
    assert elapsed < 10


# --- 6: the New V instance


def test_newv_inner_model(criterion):
    start = time.perf_counter()
    report = verify_inner_model(4)
    newv = check_newv(4)
    blv = check_schema(newv_structure(64), "blv")
    elapsed = time.perf_counter() - start
    big_big = blv.fails and blv.witness["kinds"] == ["cofinite", "cofinite"]
    ok = report.passed and len(report.sets) == 16 and newv.holds and big_big and elapsed < 60
    criterion(6, ok, elapsed,
              f"{len(report.sets)} sets, {report.tags} tags, NewV {newv.status} over {newv.bound['concepts']} concepts, BLV {blv.status}")
    assert report.passed and len(report.sets) == 16
    assert all(report.inner_model.collapse[report.images[x]] is x for x in report.sets)
    assert newv.holds
    assert big_big
    assert elapsed < 60


# --- 7: definable powersets


def test_definable_hierarchy(criterion):
    start = time.perf_counter()
    levels = defn_iterate([], 4, params="all")
    sizes = [lv.size for lv in levels]
    pure = SOStructure(["a", "b"], {})
    fam = definable_relations(pure, 1, "none")
    found = {members(r) for r in fam.relations()}
    oracle = set(oracles.invariant_subsets(pure))
    elapsed = time.perf_counter() - start
    ok = sizes[:4] == [0, 1, 2, 4] and all(lv.equal_to_powerset for lv in levels) and found == oracle == {
        frozenset(), frozenset({"a", "b"})} and elapsed < 5
    criterion(7, ok, elapsed, f"sizes {sizes}, parameter-free family {sorted(map(sorted, found))}")
    assert sizes[:4] == [0, 1, 2, 4]
    assert all(lv.equal_to_powerset for lv in levels)
    assert found == oracle == {frozenset(), frozenset({"a", "b"})}
    assert elapsed < 5


# --- 8: uniformization and codes


def test_uniformization_and_code_inversion(criterion):
    start = time.perf_counter()
    rng = random.Random(77)
    bad_unif = 0
    for _ in range(1000):
        R = {(rng.randrange(6), rng.randrange(8)) for _ in range(rng.randrange(0, 20))}
        U = uniformize(R)
        dom = {x for x, _ in R}
        functional = len({x for x, _ in U}) == len(U)
        ok = functional and {x for x, _ in U} == dom and U <= R and U == oracles.least_witness(R)
        ok = ok and all(y <= y2 for x, y in U for x2, y2 in R if x2 == x)
        bad_unif += not ok
    bad_codes = covered = 0
    for name, fx in FIXTURES.items():
        S = fx.build()
        cs = code_surjection(S, depth=3)
        for a, code in cs.iota.items():
            covered += 1
            if theta(S, cs.formulas[code[0]]) != a or cs.theta[code] != a:
                bad_codes += 1
    elapsed = time.perf_counter() - start
    ok = bad_unif == 0 and bad_codes == 0 and elapsed < 20
    criterion(8, ok, elapsed, f"1000 relations ({bad_unif} bad), {covered} covered objects ({bad_codes} bad)")
    assert bad_unif == 0
    assert bad_codes == 0
    assert elapsed < 20


# --- 9: set axioms on the New V fragment


def test_set_axioms_on_newv_fragment(criterion):
    start = time.perf_counter()
    report = verify_inner_model(3, depth=2)
    axioms = report.axioms
    must_hold = ["extensionality", "union", "pairing", "separation", "collection", "foundation"]
    statuses = {k: v.status for k, v in axioms.items()}
    infinity = axioms["infinity"]
    elapsed = time.perf_counter() - start
    ok = (
        all(axioms[k].holds for k in must_hold)
        and not infinity.holds
        and "caveat" in infinity.detail
        and "infinity" in axioms.never_at_finite_scale
        and sorted(report.inner_model.image()) == sorted(report.sets)
        and elapsed < 60
    )
    criterion(9, ok, elapsed, ", ".join(f"{k} {v}" for k, v in statuses.items()))
    assert all(axioms[k].holds for k in must_hold), statuses
    assert not infinity.holds and "caveat" in infinity.detail
    assert "infinity" in axioms.never_at_finite_scale
    assert elapsed < 60
