import pytest
from hypothesis import given, settings, strategies as st

import oracles
from abstractis.extraction import (
    ExtractionError,
    Undefined,
    check_set_axioms,
    collapse_inner_model,
    embed_j,
    eta,
    eta_members,
    eta_relation,
    inner_model_from_relation,
    is_wf_concept,
    is_wf_meta,
    restricted_eta_witness,
    sigma,
    subset_eta,
    tau_closure,
    tau_step,
    trcl_eta_meta,
    trcl_eta_object,
    wf_ext,
)
from abstractis.fixtures import FIXTURES, OUTSIDE, corpus, fixture
from abstractis.hf import EMPTY, FiniteRelation, HFSet, von_neumann
from abstractis.structures.model import SOStructure


@pytest.fixture
def S():
    return fixture("von-neumann-012")


def test_eta(S):
    assert eta(S, 0, 1)
    assert not any(eta(S, x, 0) for x in S.objects)
    assert not eta(S, 2, 2)


def test_subset_eta(S):
    assert subset_eta(S, 0, 2)
    assert not subset_eta(S, 2, 1)
    U = fixture("urelement")
    assert all(subset_eta(U, "u", b) for b in U.objects)


def test_sigma(S):
    assert sigma(S, 0) == 1 and sigma(S, 1) == 2
    assert isinstance(sigma(S, 2), Undefined) and not sigma(S, 2)
    assert sigma(S, 2).reason == "successor concept missing"
    assert sigma(fixture("urelement"), "u").reason != sigma(S, 2).reason


def test_meta_trcl(S):
    assert trcl_eta_meta(S, 0) == frozenset()
    assert trcl_eta_meta(S, 2) == {0, 1}
    assert trcl_eta_meta(fixture("quine-atom"), "q") == {"q"}


def test_object_trcl(S):
    assert trcl_eta_object(S, 2).members == {0, 1}
    assert trcl_eta_object(S, 0).members == frozenset()
    Q = fixture("quine-atom")
    t = trcl_eta_object(Q, "q")
    if t.vacuous:
        assert t.members == frozenset(Q.objects)


def test_object_trcl_vacuous():
    # 0 and 1 name each other's singletons; an η-transitive F would need both
    T = SOStructure([0, 1], {1: [frozenset({(0,)}), frozenset({(1,)})]},
                    ext=[(1, {frozenset({(0,)}): 1, frozenset({(1,)}): 0})])
    t = trcl_eta_object(T, 1)
    assert t.vacuous and t.members == {0, 1}


def test_tau(S):
    assert tau_step(S, {2}) == {0, 1}
    assert tau_step(S, {0}) == frozenset()
    assert tau_closure(S, {2}) == {0, 1, 2}
    assert tau_closure(S, tau_step(S, {2})) == trcl_eta_meta(S, 2)


def test_well_foundedness_levels():
    Q = fixture("quine-atom")
    assert not is_wf_meta({"q"}, eta_relation(Q).edges)
    assert is_wf_concept(Q, {"q"}).fails
    T = fixture("two-cycle")
    v = is_wf_concept(T, set(T.objects))
    assert v.holds and "meta/concept divergence" in v.flags
    assert not is_wf_meta(set(T.objects), eta_relation(T).edges)
    assert is_wf_meta(set(), []) and is_wf_concept(Q, set()).holds


def test_restricted_eta_witness(S):
    W = fixture("with-binary-witness")
    v = restricted_eta_witness(W, {1, 2})
    assert v.holds and v.witness == {(1, 0), (2, 0), (2, 1)}
    assert v.detail["E_X"] == {(0, 1), (0, 2), (1, 2)}
    assert restricted_eta_witness(S, set()).holds
    assert restricted_eta_witness(S, set()).witness == frozenset()
    v = restricted_eta_witness(S, {1, 2})
    assert v.fails and v.witness == {"X": frozenset({(1,), (2,)})}
    with pytest.raises(ExtractionError):
        restricted_eta_witness(fixture("urelement"), {"u"})


def test_wf_ext_examples(S):
    assert wf_ext(S, "concept").members == (0, 1, 2)
    assert wf_ext(S, "meta").members == (0, 1, 2)
    Q = fixture("quine-atom")
    assert "q" in wf_ext(Q, "meta").excluded
    U = fixture("urelement")
    assert wf_ext(U, "meta").excluded["u"] == "not an extension"
    assert wf_ext(U, "concept").excluded["u"] == "not an extension"


def test_embedding(S):
    j = embed_j(S, 2)
    assert j.mapping[EMPTY] == 0 and j.mapping[HFSet([EMPTY])] == 1
    assert HFSet([HFSet([EMPTY])]) in j.undefined
    for x, a in j.mapping.items():
        for y, b in j.mapping.items():
            assert (y in x) == eta(S, b, a)


def test_collapse(S):
    im = collapse_inner_model(S)
    assert im.collapse == {0: von_neumann(0), 1: von_neumann(1), 2: von_neumann(2)}
    assert im.is_transitive() and im.injective
    assert collapse_inner_model(fixture("empty")).collapse == {}


def test_collapse_of_non_extensional_carrier():
    im = collapse_inner_model(fixture("non-extensional"))
    assert not im.injective
    assert im.is_transitive()


def test_uncollapsed_reasons():
    R = FiniteRelation(("a", "b", "c"), frozenset({("a", "a"), ("a", "b")}))
    im = inner_model_from_relation(R, "meta")
    assert set(im.uncollapsed) == {"a", "b"}
    assert im.collapse == {"c": EMPTY}


def test_set_axioms_on_running_structure(S):
    report = check_set_axioms(collapse_inner_model(S))
    assert report["extensionality"].holds and report["foundation"].holds
    pairing = report["pairing"]
    assert pairing.fails and [2, 2] in pairing.detail["violations"]
    assert report["infinity"].fails
    assert report.never_at_finite_scale == ("infinity",)


def test_set_axioms_on_empty_model():
    report = check_set_axioms(collapse_inner_model(fixture("empty")))
    for name in ("extensionality", "pairing", "union", "separation", "collection", "foundation"):
        assert report[name].holds


def test_inner_model_exports(S):
    im = collapse_inner_model(S)
    data = im.to_json()
    assert data["collapse"] and data["edges"] == ["0<1", "0<2", "1<2"]
    assert "{}" in im.to_text()


# --- invariants over the fixture corpus


INJECTIVE = sorted(n for n in FIXTURES if all(op.is_injective() for op in fixture(n).ext))


@pytest.mark.parametrize("name", INJECTIVE)
def test_sigma_contract(name):
    T = fixture(name)
    for x in T.objects:
        s = sigma(T, x)
        if isinstance(s, Undefined):
            continue
        for z in T.objects:
            assert eta(T, z, s) == (eta(T, z, x) or z == x)


@pytest.mark.parametrize("name", INJECTIVE)
def test_meta_trcl_inside_object_trcl(name):
    T = fixture(name)
    for x in T.objects:
        t = trcl_eta_object(T, x)
        assert trcl_eta_meta(T, x) <= t.members


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_tau_identity(name):
    T = fixture(name)
    for op in T.ext[:1]:
        injective = op.is_injective()
        for U, b in op.table.items():
            assert tau_closure(T, eta_members(T, b)) == trcl_eta_meta(T, b)
            if injective:
                assert tau_closure(T, U) == trcl_eta_meta(T, b)


def test_sigma_contract_needs_injectivity():
    # b names both {z,w} and {v}, so v η b without v η w
    T = fixture("non-extensional")
    assert sigma(T, "w") == "b"
    assert eta(T, "v", "b") and not eta(T, "v", "w")
    assert trcl_eta_meta(T, "b") - trcl_eta_object(T, "b").members


def test_literal_tau_identity_needs_injectivity():
    T = fixture("non-extensional-twins")
    op = T.ext[0]
    assert not op.is_injective()
    assert any(tau_closure(T, U) != trcl_eta_meta(T, b) for U, b in op.table.items())


def test_inclusion_on_corpus():
    for T in corpus():
        assert set(wf_ext(T, "meta").members) <= set(wf_ext(T, "concept").members), T.name


@pytest.mark.parametrize("name", OUTSIDE)
def test_outside_fixtures_break_an_identity(name):
    T = fixture(name)
    meta = set(wf_ext(T, "meta").members)
    concept = set(wf_ext(T, "concept").members)
    im = collapse_inner_model(T, "meta")
    broken_inclusion = not meta <= concept
    broken_inversion = False
    if im.carrier and not im.uncollapsed:
        rank = max(s.rank for s in im.collapse.values())
        j = embed_j(T, rank)
        broken_inversion = any(j.mapping.get(s) != x for x, s in im.collapse.items())
        broken_inversion = broken_inversion or any(im.collapse.get(x) != s for s, x in j.mapping.items())
    assert broken_inclusion or broken_inversion


def test_meta_divergence_is_flagged():
    T = fixture("two-cycle")
    ext = wf_ext(T, "concept")
    assert set(ext.members) == set(T.objects)
    assert all("meta/concept divergence" in ext.flags[x] for x in T.objects)
    assert not wf_ext(T, "meta").members


# --- random structures


@st.composite
def random_structures(draw):
    n = draw(st.integers(1, 4))
    objs = list(range(n))
    fam = draw(st.lists(st.frozensets(st.sampled_from(objs)), unique=True, max_size=6))
    fam = [frozenset((a,) for a in c) for c in fam]
    targets = draw(st.permutations(objs))
    k = draw(st.integers(0, min(len(fam), n)))
    table = dict(zip(fam[:k], targets[:k]))
    return SOStructure(objs, {1: fam}, ext=[(1, table)])


@settings(max_examples=150, deadline=None)
@given(random_structures())
def test_random_structure_invariants(T):
    for x in T.objects:
        s = sigma(T, x)
        if not isinstance(s, Undefined):
            assert all(eta(T, z, s) == (eta(T, z, x) or z == x) for z in T.objects)
        assert trcl_eta_meta(T, x) <= trcl_eta_object(T, x).members
    for U, b in T.ext[0].table.items():
        assert tau_closure(T, U) == trcl_eta_meta(T, b)
    im = collapse_inner_model(T, "meta")
    pi = oracles.collapse(im.carrier, im.membership.edges)
    assert im.collapse == pi
    if im.extensional:
        assert im.injective and im.is_transitive()
        rank = max((s.rank for s in pi.values()), default=0)
        j = embed_j(T, rank)
        assert all(j.mapping[s] == x for x, s in pi.items())
        assert all(pi[x] == s for s, x in j.mapping.items() if x in pi)
