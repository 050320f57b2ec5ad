"""A computable model of New V over the hereditarily finite sets.

Objects are all HF sets.  Unary concepts are the finite and cofinite sets
of HF sets; a concept is small exactly when it is finite.  The extension
operator sends a small ``X`` to ``<1, X>`` and every big concept to
``<0, 0>``, which makes ``ext(X) = ext(Y) <-> ((Small X or Small Y) -> X = Y)``
true for all pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .extraction import AxiomReport, InnerModel, check_set_axioms, inner_model_from_relation
from .hf import EMPTY, ONE, FiniteRelation, HFSet, decode, format_hf, hf_universe, pair, unpair
from .structures.model import (
    FAILS,
    HOLDS,
    UNKNOWN,
    ExtUndefinedError,
    LazySort,
    LazyStructure,
    SOStructure,
    Timer,
    Verdict,
)

FINITE = "finite"
COFINITE = "cofinite"
SMALL_FLAG = "Small: semantic"
BIG_VALUE = pair(EMPTY, EMPTY)
MAX_RANK = 5


@dataclass(frozen=True)
class FcSet:
    """A finite or cofinite set of HF sets.

    ``support`` lists the members (finite kind) or the non-members (cofinite
    kind) in canonical order.  Membership accepts a bare HF set or a 1-tuple.
    """

    kind: str
    support: tuple = ()

    def __post_init__(self):
        if self.kind not in (FINITE, COFINITE):
            raise ValueError(f"kind must be {FINITE!r} or {COFINITE!r}")
        items = self.support.elements if isinstance(self.support, HFSet) else self.support
        for e in items:
            if not isinstance(e, HFSet):
                raise TypeError("support members must be HFSet")
        object.__setattr__(self, "support", tuple(sorted(set(items))))

    @classmethod
    def finite(cls, items=()) -> "FcSet":
        return cls(FINITE, tuple(items))

    @classmethod
    def cofinite(cls, missing=()) -> "FcSet":
        return cls(COFINITE, tuple(missing))

    @classmethod
    def from_relation(cls, rel) -> "FcSet":
        return cls(FINITE, tuple(t[0] for t in rel))

    def __contains__(self, item) -> bool:
        if isinstance(item, tuple):
            if len(item) != 1:
                return False
            item = item[0]
        inside = item in self.support
        return inside if self.kind == FINITE else not inside

    def __iter__(self):
        if self.kind != FINITE:
            raise TypeError("a cofinite set cannot be listed")
        return ((e,) for e in self.support)

    @property
    def small(self) -> bool:
        return self.kind == FINITE

    def complement(self) -> "FcSet":
        return FcSet(COFINITE if self.kind == FINITE else FINITE, self.support)

    def as_hf(self) -> HFSet:
        if self.kind != FINITE:
            raise ValueError("a cofinite set is not an HF set")
        return HFSet(self.support)

    def render(self) -> str:
        return str(self)

    def __str__(self):
        body = "{" + ",".join(format_hf(e) for e in self.support) + "}"
        return body if self.kind == FINITE else f"HF \\ {body}"


def small(X: FcSet) -> bool:
    """Finite concepts are the small ones."""
    return X.small


def newv_ext(X: FcSet) -> HFSet:
    """``<1, X>`` for small ``X``, ``<0, 0>`` otherwise."""
    if X.small:
        return pair(ONE, X.as_hf())
    return BIG_VALUE


def tag_members(b: HFSet):
    """Members of the small concept tagged by ``b``, or None if ``b`` is no tag."""
    parts = unpair(b)
    if parts is None or parts[0] is not ONE:
        return None
    return parts[1]


def eta_prime(a: HFSet, b: HFSet) -> bool:
    """``a η' b``: some small ``B`` with ``ext(B) = b`` contains ``a``."""
    inner = tag_members(b)
    return inner is not None and a in inner


def newv_biconditional(X: FcSet, Y: FcSet) -> bool:
    same = newv_ext(X) == newv_ext(Y)
    return same == (not (X.small or Y.small) or X == Y)


# --- the lazy structure


def _objects() -> LazySort:
    return LazySort(lambda x: isinstance(x, HFSet), lambda: (decode(n) for n in itertools.count()))


def _unary_concepts():
    for n in itertools.count():
        s = decode(n)
        yield FcSet(FINITE, s.elements)
        yield FcSet(COFINITE, s.elements)


def _cantor_unpair(k: int) -> tuple[int, int]:
    w = int(((8 * k + 1) ** 0.5 - 1) // 2)
    while w * (w + 1) // 2 > k:
        w -= 1
    while (w + 1) * (w + 2) // 2 <= k:
        w += 1
    j = k - w * (w + 1) // 2
    return w - j, j


def _binary_relations():
    # bit k of n holds the pair numbered k in Cantor's enumeration
    for n in itertools.count():
        rel = []
        k = 0
        m = n
        while m:
            if m & 1:
                i, j = _cantor_unpair(k)
                rel.append((decode(i), decode(j)))
            m >>= 1
            k += 1
        yield frozenset(rel)


def _is_finite_binary(rel) -> bool:
    return isinstance(rel, frozenset) and all(
        isinstance(t, tuple) and len(t) == 2 and all(isinstance(a, HFSet) for a in t) for t in rel
    )


def _ext(X):
    if not isinstance(X, FcSet):
        raise ExtUndefinedError(1, X)
    return newv_ext(X)


def newv_structure(budget: int = 64) -> LazyStructure:
    """The New V structure; quantifiers search the first ``budget`` elements of each sort."""
    return LazyStructure(
        objects=_objects(),
        concepts={
            1: LazySort(lambda X: isinstance(X, FcSet), _unary_concepts),
            2: LazySort(_is_finite_binary, _binary_relations),
        },
        ext=[(1, _ext)],
        less=lambda a, b: a < b,
        concept_factory={1: FcSet.from_relation},
        budget=budget,
        name="newv-hf",
        flags=(SMALL_FLAG,),
    )


# --- New V itself


def supports(rank_bound: int) -> list[HFSet]:
    """Every support whose HF rank is at most ``rank_bound``."""
    return hf_universe(rank_bound + 1)


def check_newv(rank_bound: int = 4, pairwise_rank: int = 3) -> Verdict:
    """The New V biconditional for all concepts with support rank ``≤ rank_bound``.

    Pairs with both supports of rank ``≤ pairwise_rank`` are checked one by
    one.  All pairs are covered by grouping on extension values: the
    biconditional holds for every pair iff small concepts get pairwise
    distinct values, no small and big concept share a value, and all big
    concepts share one.
    """
    with Timer() as timer:
        low = [FcSet(k, s.elements) for s in supports(pairwise_rank) for k in (FINITE, COFINITE)]
        witness = None
        pairs = 0
        for X in low:
            for Y in low:
                pairs += 1
                if not newv_biconditional(X, Y):
                    witness = {"pair": [str(X), str(Y)]}
                    break
            if witness:
                break
        classes = 0
        if witness is None:
            small_values: dict = {}
            big_values: set = set()
            for s in supports(rank_bound):
                X = FcSet(FINITE, s.elements)
                v = newv_ext(X)
                if v in small_values:
                    witness = {"pair": [str(small_values[v]), str(X)], "reason": "two small concepts share a value"}
                    break
                small_values[v] = X
                big_values.add(newv_ext(X.complement()))
            if witness is None:
                if len(big_values) != 1:
                    witness = {"reason": "big concepts take several values"}
                elif big_values & small_values.keys():
                    witness = {"reason": "a small and a big concept share a value"}
            classes = len(small_values) + len(big_values)
    status = FAILS if witness else HOLDS
    bound = {"support_rank": rank_bound, "concepts": 2 * len(supports(rank_bound)), "pairs_checked": pairs, "value_classes": classes}
    return Verdict(status, "NewV", witness, bound, timer.elapsed, flags=(SMALL_FLAG,))


# --- the recovered inner model


def j_prime(x: HFSet, memo: dict | None = None) -> HFSet:
    """``j'(x) = <1, {j'(y) : y ∈ x}>``."""
    memo = {} if memo is None else memo
    out = memo.get(x)
    if out is None:
        out = pair(ONE, HFSet(j_prime(y, memo) for y in x))
        memo[x] = out
    return out


def wf_ext_prime(x: HFSet, budget: int = 1 << 16):
    """Meta-level well-founded extension test for ``η'``.

    Returns ``(True|False|None, reason)``; None when more than ``budget``
    nodes would have to be visited.
    """
    seen: set = set()
    stack = [x]
    while stack:
        y = stack.pop()
        if y in seen:
            continue
        seen.add(y)
        if len(seen) > budget:
            return None, "budget exhausted"
        inner = tag_members(y)
        if inner is None:
            return False, f"{format_hf(y)} is not the extension of a small concept"
        stack.extend(inner)
    # HF sets are well-founded, so η' (a sub-relation of ∈∘∈) has no cycles
    return True, None


@dataclass
class InnerModelReport:
    rank: int
    sets: list
    images: dict
    failures: list
    wf_failures: dict
    inner_model: InnerModel | None
    axioms: AxiomReport | None
    elapsed: float = 0.0
    flags: tuple = (SMALL_FLAG,)
    partial: bool = False
    tags: int = 0
    max_tag_rank: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures and not self.wf_failures and not self.partial

    def to_json(self) -> dict:
        out = {
            "schema": "NewVInnerModel",
            "status": HOLDS if self.passed else (UNKNOWN if self.partial and not self.failures else FAILS),
            "witness": (self.failures or [None])[0],
            "bound": {"rank": self.rank, "sets": len(self.sets), "tags": self.tags, "max_tag_rank": self.max_tag_rank},
            "elapsed": self.elapsed,
            "flags": list(self.flags),
            "detail": {
                "checked": [format_hf(s) for s in self.sets],
                "wf_failures": {format_hf(k): v for k, v in self.wf_failures.items()},
            },
        }
        if self.axioms is not None:
            out["axioms"] = self.axioms.to_json()
        return out


def verify_inner_model(r: int, depth: int = 2, budget: int = 1 << 16) -> InnerModelReport:
    """Check ``π(j'(x)) = x`` for every ``x`` of rank below ``r`` and run the set-axiom checks.

    The fragment carrier is ``j'[V_r]``; each image is first confirmed to be
    a well-founded extension under ``η'``.
    """
    if r < 0 or r > MAX_RANK:
        raise ValueError(f"rank must lie in 0..{MAX_RANK}")
    with Timer() as timer:
        sets = hf_universe(r)
        memo: dict = {}
        images = {x: j_prime(x, memo) for x in sets}
        wf_failures = {}
        partial = False
        for x, jx in images.items():
            ok, reason = wf_ext_prime(jx, budget)
            if ok is None:
                partial = True
            elif not ok:
                wf_failures[x] = reason
        carrier = tuple(images[x] for x in sets)
        inside = set(carrier)
        edges = frozenset(
            (a, b) for b in carrier for a in tag_members(b) if a in inside
        )
        im = inner_model_from_relation(
            FiniteRelation(carrier, edges), "meta", fragment=True, flags=(SMALL_FLAG,)
        )
        failures = []
        for x, jx in images.items():
            got = im.collapse.get(jx)
            if got is not x:
                failures.append({"set": format_hf(x), "collapse": None if got is None else format_hf(got)})
        axioms = check_set_axioms(im, rank_bound=r, depth=depth)
    return InnerModelReport(
        rank=r,
        sets=sets,
        images=images,
        failures=failures,
        wf_failures=wf_failures,
        inner_model=im,
        axioms=axioms,
        elapsed=timer.elapsed,
        partial=partial,
        tags=len(inside),
        max_tag_rank=max((t.rank for t in inside), default=0),
    )


def fragment_structure(r: int) -> SOStructure:
    """The exhaustive sub-structure on ``j'[V_r]`` with the small concepts it needs."""
    memo: dict = {}
    carrier = [j_prime(x, memo) for x in hf_universe(r)]
    table = {}
    for b in carrier:
        table[frozenset((a,) for a in tag_members(b))] = b
    return SOStructure(carrier, {1: list(table)}, ext=[(1, table)], name=f"newv-fragment-{r}")
