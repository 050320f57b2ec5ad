"""Hereditarily finite sets, the Ackermann order, and Mostowski collapse.

HFSet values are interned on construction, so two extensionally equal sets are
the same Python object and ``==`` is an identity test.  The canonical order is
the order of Ackermann codes ``N(s) = sum(2**N(y) for y in s)``; it is computed
structurally so that deeply nested sets never need their (astronomical) codes.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from functools import cmp_to_key, lru_cache
from typing import Iterable, Iterator

DEFAULT_MAX_BITS = 1 << 20


class CodeOverflowError(OverflowError):
    """An Ackermann code would exceed the configured big-integer budget."""


class NotWellFoundedError(ValueError):
    """A relation handed to the collapse contains a cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("not well-founded: cycle " + " -> ".join(map(str, self.cycle)))


class UnknownNodeError(KeyError):
    pass


def max_code_bits() -> int:
    raw = os.environ.get("ABSTRACTIS_MAX_BIGINT_BITS")
    return int(raw) if raw else DEFAULT_MAX_BITS


_intern: dict[tuple[int, ...], "HFSet"] = {}
_intern_lock = threading.Lock()


class HFSet:
    """A canonical hereditarily finite set.

    ``elements`` is a tuple sorted strictly ascending in the canonical order.
    """

    __slots__ = ("elements", "_members", "_hash", "_rank", "_code")

    def __new__(cls, elements: Iterable["HFSet"] = ()):
        unique = {}
        for e in elements:
            if not isinstance(e, HFSet):
                raise TypeError(f"HFSet elements must be HFSet, got {type(e).__name__}")
            unique[id(e)] = e
        ordered = sorted(unique.values(), key=_cmp_key)
        return cls._make(tuple(ordered))

    @classmethod
    def _make(cls, ordered: tuple["HFSet", ...]) -> "HFSet":
        # caller guarantees `ordered` is strictly ascending and duplicate-free
        key = tuple(map(id, ordered))
        obj = _intern.get(key)
        if obj is not None:
            return obj
        with _intern_lock:
            obj = _intern.get(key)
            if obj is None:
                obj = object.__new__(cls)
                obj.elements = ordered
                obj._members = frozenset(ordered)
                obj._hash = hash(("HF",) + tuple(e._hash for e in ordered))
                obj._rank = 1 + max(e._rank for e in ordered) if ordered else 0
                obj._code = None
                _intern[key] = obj
        return obj

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return self is other

    def __ne__(self, other) -> bool:
        return self is not other

    def __lt__(self, other: "HFSet") -> bool:
        return canonical_cmp(self, other) < 0

    def __le__(self, other: "HFSet") -> bool:
        return canonical_cmp(self, other) <= 0

    def __gt__(self, other: "HFSet") -> bool:
        return canonical_cmp(self, other) > 0

    def __ge__(self, other: "HFSet") -> bool:
        return canonical_cmp(self, other) >= 0

    def __contains__(self, item) -> bool:
        return item in self._members

    def __iter__(self) -> Iterator["HFSet"]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __bool__(self) -> bool:
        return bool(self.elements)

    def __str__(self) -> str:
        return format_hf(self)

    def __repr__(self) -> str:
        return f"HFSet({format_hf(self)})"

    def __reduce__(self):
        return (HFSet, (list(self.elements),))

    @property
    def rank(self) -> int:
        return self._rank

    def union(self, other: "HFSet") -> "HFSet":
        return HFSet(self.elements + other.elements)

    def with_element(self, x: "HFSet") -> "HFSet":
        return HFSet(self.elements + (x,))

    def issubset(self, other: "HFSet") -> bool:
        return self._members <= other._members


EMPTY = HFSet._make(())
ONE = HFSet._make((EMPTY,))


def canonical_cmp(a: HFSet, b: HFSet) -> int:
    """Compare by Ackermann code without computing codes: -1, 0 or 1.

    Walking both element lists from the top, the first position where they
    differ holds the largest element of the symmetric difference, and the set
    owning it has the larger code.
    """
    if a is b:
        return 0
    ea, eb = a.elements, b.elements
    i, j = len(ea) - 1, len(eb) - 1
    while i >= 0 and j >= 0:
        x, y = ea[i], eb[j]
        if x is not y:
            return canonical_cmp(x, y)
        i -= 1
        j -= 1
    return 1 if i >= 0 else -1


_cmp_key = cmp_to_key(canonical_cmp)


def rank(s: HFSet) -> int:
    return s._rank


def ack_code(s: HFSet, max_bits: int | None = None) -> int:
    """Ackermann code of ``s``; raises CodeOverflowError past ``max_bits``."""
    if s._code is not None:
        return s._code
    limit = max_code_bits() if max_bits is None else max_bits
    total = 0
    for y in s.elements:
        n = ack_code(y, limit)
        if n >= limit:
            raise CodeOverflowError(f"set too large: code needs more than {limit} bits")
        total |= 1 << n
    s._code = total
    return total


@lru_cache(maxsize=1 << 17)
def decode(n: int) -> HFSet:
    """The HFSet whose Ackermann code is ``n``."""
    if n < 0:
        raise ValueError("Ackermann codes are natural numbers")
    elems = []
    i = 0
    while n:
        if n & 1:
            elems.append(decode(i))
        n >>= 1
        i += 1
    # bits ascend, so elements are already in canonical order
    return HFSet._make(tuple(elems))


def tower(r: int) -> int:
    """|V_r|: 0, 1, 2, 4, 16, 65536, ..."""
    n = 0
    for _ in range(r):
        n = 1 << n
    return n


def hf_universe(r: int) -> list[HFSet]:
    """All sets of rank < r (the finite level V_r), in canonical order."""
    return [decode(n) for n in range(tower(r))]


def von_neumann(n: int) -> HFSet:
    s = EMPTY
    for _ in range(n):
        s = s.with_element(s)
    return s


def pair(a: HFSet, b: HFSet) -> HFSet:
    """Kuratowski pair {{a},{a,b}}."""
    return HFSet([HFSet([a]), HFSet([a, b])])


def unpair(p: HFSet) -> tuple[HFSet, HFSet] | None:
    """Inverse of ``pair``; None when ``p`` is not a Kuratowski pair."""
    if len(p) == 1:
        (s,) = p.elements
        if len(s) == 1:
            return s.elements[0], s.elements[0]
        return None
    if len(p) != 2:
        return None
    s, t = p.elements
    if len(s) != 1:
        s, t = t, s
    if len(s) != 1 or len(t) != 2:
        return None
    a = s.elements[0]
    if a not in t:
        return None
    b = t.elements[0] if t.elements[1] is a else t.elements[1]
    return a, b


def format_hf(s: HFSet) -> str:
    return "{" + ",".join(format_hf(e) for e in s.elements) + "}"


def parse_hf(text: str) -> HFSet:
    """Parse ``{}``, ``{{},{{}}}`` and so on; whitespace is ignored."""
    src = "".join(text.split())
    value, pos = _parse_hf_at(src, 0)
    if pos != len(src):
        raise ValueError(f"unexpected {src[pos]!r} at offset {pos} in HF literal")
    return value


def _parse_hf_at(src: str, pos: int) -> tuple[HFSet, int]:
    if pos >= len(src) or src[pos] != "{":
        raise ValueError(f"expected '{{' at offset {pos} in HF literal")
    pos += 1
    elems = []
    if pos < len(src) and src[pos] == "}":
        return EMPTY, pos + 1
    while True:
        e, pos = _parse_hf_at(src, pos)
        elems.append(e)
        if pos >= len(src):
            raise ValueError("unterminated HF literal")
        if src[pos] == ",":
            pos += 1
        elif src[pos] == "}":
            return HFSet(elems), pos + 1
        else:
            raise ValueError(f"unexpected {src[pos]!r} at offset {pos} in HF literal")


# --- finite relations -------------------------------------------------------


@dataclass(frozen=True)
class FiniteRelation:
    """Nodes plus edges ``(a, b)`` read as "a is R-below b"."""

    nodes: tuple
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        nodes = tuple(dict.fromkeys(self.nodes))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", frozenset(self.edges))
        known = set(nodes)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise ValueError(f"edge {a}<{b} mentions an undeclared node")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], nodes: Iterable = ()) -> "FiniteRelation":
        edges = list(edges)
        ns = list(nodes)
        for a, b in edges:
            ns.extend((a, b))
        return cls(tuple(ns), frozenset(edges))

    def predecessors(self) -> dict:
        below = {n: [] for n in self.nodes}
        for a, b in sorted(self.edges, key=_edge_key):
            below[b].append(a)
        return below

    def restrict(self, keep: Iterable) -> "FiniteRelation":
        keep = set(keep)
        nodes = tuple(n for n in self.nodes if n in keep)
        return FiniteRelation(nodes, frozenset((a, b) for a, b in self.edges if a in keep and b in keep))

    def to_text(self) -> str:
        lines = []
        touched = set()
        for a, b in sorted(self.edges, key=_edge_key):
            lines.append(f"{a}<{b}")
            touched.update((a, b))
        lines.extend(str(n) for n in self.nodes if n not in touched)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str) -> "FiniteRelation":
        nodes, edges = [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "<" in line:
                a, b = (p.strip() for p in line.split("<", 1))
                if not a or not b:
                    raise ValueError(f"malformed edge line {raw!r}")
                edges.append((a, b))
                nodes.extend((a, b))
            else:
                nodes.append(line)
        return cls(tuple(nodes), frozenset(edges))


def _edge_key(edge):
    return (str(edge[0]), str(edge[1]))


def meta_trcl(x, R: FiniteRelation) -> frozenset:
    """Nodes reachable from ``x`` by a nonempty R-descending path."""
    below = R.predecessors()
    if x not in below:
        raise UnknownNodeError(x)
    seen = set()
    stack = list(below[x])
    while stack:
        y = stack.pop()
        if y in seen:
            continue
        seen.add(y)
        stack.extend(below[y])
    return frozenset(seen)


def is_extensional(R: FiniteRelation) -> bool:
    below = R.predecessors()
    sigs = [frozenset(v) for v in below.values()]
    return len(set(sigs)) == len(sigs)


def find_cycle(R: FiniteRelation) -> list | None:
    """A witness cycle ``[a, ..., a]`` following edges upward, or None."""
    above = {n: [] for n in R.nodes}
    for a, b in sorted(R.edges, key=_edge_key):
        above[a].append(b)
    colour = {n: 0 for n in R.nodes}
    for root in R.nodes:
        if colour[root]:
            continue
        path = [root]
        iters = [iter(above[root])]
        colour[root] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                colour[path.pop()] = 2
                iters.pop()
                continue
            if colour[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            if colour[nxt] == 0:
                colour[nxt] = 1
                path.append(nxt)
                iters.append(iter(above[nxt]))
    return None


def mostowski_collapse(R: FiniteRelation) -> dict:
    """The map pi with pi(y) = {pi(y') : y' R y}; raises on cycles."""
    cycle = find_cycle(R)
    if cycle is not None:
        raise NotWellFoundedError(cycle)
    below = R.predecessors()
    pi: dict = {}
    for root in R.nodes:
        if root in pi:
            continue
        stack = [root]
        while stack:
            y = stack[-1]
            pending = [z for z in below[y] if z not in pi]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            if y not in pi:
                pi[y] = HFSet(pi[z] for z in below[y])
    return pi


def is_transitive_family(sets: Iterable[HFSet]) -> bool:
    family = set(sets)
    return all(e in family for s in family for e in s.elements)
