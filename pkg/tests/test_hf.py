import pytest
from hypothesis import given, settings, strategies as st

from abstractis.hf import (
    EMPTY,
    FiniteRelation,
    HFSet,
    NotWellFoundedError,
    ack_code,
    decode,
    find_cycle,
    format_hf,
    hf_universe,
    is_extensional,
    is_transitive_family,
    mostowski_collapse,
    pair,
    parse_hf,
    rank,
    tower,
    unpair,
    von_neumann,
)

codes = st.integers(min_value=0, max_value=1 << 16)


@given(codes)
def test_ackermann_round_trip(n):
    assert ack_code(decode(n)) == n


@given(codes, codes)
def test_order_agrees_with_codes(m, n):
    assert (decode(m) < decode(n)) == (m < n)


@given(codes)
def test_members_have_smaller_rank(n):
    s = decode(n)
    assert all(rank(e) < rank(s) for e in s)


@given(codes, codes)
def test_pairs_decode(m, n):
    a, b = decode(m), decode(n)
    assert unpair(pair(a, b)) == (a, b)


@given(codes)
def test_text_round_trip(n):
    s = decode(n)
    assert parse_hf(format_hf(s)) is s


def test_interning():
    assert HFSet([EMPTY]) is HFSet((EMPTY, EMPTY))
    assert HFSet() is EMPTY


def test_small_codes():
    assert [format_hf(decode(n)) for n in range(4)] == ["{}", "{{}}", "{{{}}}", "{{},{{}}}"]
    assert ack_code(von_neumann(2)) == 3


def test_universe_sizes():
    assert [len(hf_universe(r)) for r in range(5)] == [0, 1, 2, 4, 16]
    assert [tower(r) for r in range(5)] == [0, 1, 2, 4, 16]
    assert all(rank(s) < 4 for s in hf_universe(4))


def test_non_pairs_do_not_unpair():
    assert unpair(von_neumann(3)) is None


def test_collapse_of_ordinal_chain():
    R = FiniteRelation(("a", "b", "c"), frozenset({("a", "b"), ("a", "c"), ("b", "c")}))
    assert mostowski_collapse(R) == {"a": von_neumann(0), "b": von_neumann(1), "c": von_neumann(2)}


def test_collapse_rejects_cycles():
    R = FiniteRelation(("a", "b"), frozenset({("a", "b"), ("b", "a")}))
    assert find_cycle(R)
    with pytest.raises(NotWellFoundedError):
        mostowski_collapse(R)


def test_extensionality_detection():
    assert not is_extensional(FiniteRelation(("a", "b"), frozenset()))
    assert is_extensional(FiniteRelation(("a", "b"), frozenset({("a", "b")})))


@settings(max_examples=200)
@given(st.data())
def test_collapse_of_membership_is_identity(data):
    sets = data.draw(st.lists(st.integers(0, 4095).map(decode), max_size=8))
    closed = set()
    stack = list(sets)
    while stack:
        s = stack.pop()
        if s not in closed:
            closed.add(s)
            stack.extend(s)
    nodes = tuple(closed)
    R = FiniteRelation(nodes, frozenset((a, b) for b in nodes for a in b))
    assert is_transitive_family(nodes)
    assert mostowski_collapse(R) == {s: s for s in nodes}
