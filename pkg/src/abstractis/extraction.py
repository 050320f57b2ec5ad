"""Set theory read off an extension operator.

For a unary extension operator ``∂`` the Fregean membership relation is
``a η b`` iff some concept ``B`` with ``∂(B) = b`` contains ``a``.  This module
computes η, the successor ``σ``, transitive closures inside and outside the
object language, well-foundedness at both levels, the well-founded
extensions, the embedding ``j`` of hereditarily finite sets, the collapse of
the recovered inner model and bounded checks of set-theoretic axioms on it.

Functions take the operator index ``op`` (1-based, default 1).  Objects are
always reported in the structure's object order.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np

from .hf import FiniteRelation, find_cycle, format_hf, hf_universe, is_extensional, mostowski_collapse
from .structures.model import FAILS, HOLDS, UNKNOWN, SOStructure, Timer, Verdict, as_relation, members

CONCEPT = "concept"
META = "meta"
LEVELS = (CONCEPT, META)

NOT_AN_EXTENSION = "not an extension"
SUCCESSOR_MISSING = "successor concept missing"

AXIOMS = (
    "extensionality",
    "pairing",
    "union",
    "separation",
    "collection",
    "foundation",
    "well-ordering",
    "infinity",
)
# every finite carrier fails these, whatever the structure
NEVER_AT_FINITE_SCALE = ("infinity",)


class ExtractionError(ValueError):
    pass


class _EtaIndex:
    """Membership data for one unary operator of an exhaustive structure."""

    def __init__(self, S, op: int):
        if S.lazy:
            raise ExtractionError("extraction needs an exhaustive structure")
        if op < 1 or op > len(S.ext):
            raise ExtractionError(f"structure has no operator ext{op}")
        if S.ext_arity(op) != 1:
            raise ExtractionError(f"ext{op} is not a unary operator")
        table = S.ext[op - 1].table
        self.S = S
        self.table = table
        self.preimages: dict = {}
        for concept in S.concepts.get(1, ()):
            if concept in table:
                self.preimages.setdefault(table[concept], []).append(concept)
        self.rng = frozenset(self.preimages)
        self.below = {o: frozenset() for o in S.objects}
        for b, concepts in self.preimages.items():
            self.below[b] = frozenset().union(*(members(c) for c in concepts))
        self.injective = all(len(cs) == 1 for cs in self.preimages.values())
        self.edges = frozenset((a, b) for b, ms in self.below.items() for a in ms)


_indexes: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _index(S, op: int = 1) -> _EtaIndex:
    per = _indexes.setdefault(S, {})
    if op not in per:
        per[op] = _EtaIndex(S, op)
    return per[op]


def _ordered(S, objs) -> tuple:
    objs = set(objs)
    return tuple(o for o in S.objects if o in objs)


def _as_members(X) -> frozenset:
    X = frozenset(X)
    if X and all(isinstance(t, tuple) and len(t) == 1 for t in X):
        return members(X)
    return X


# --- membership


def eta(S, a, b, op: int = 1) -> bool:
    """``a η b``: some concept with extension ``b`` contains ``a``."""
    return a in _index(S, op).below.get(b, ())


def eta_members(S, b, op: int = 1) -> frozenset:
    """All ``a`` with ``a η b``."""
    return _index(S, op).below.get(b, frozenset())


def eta_relation(S, op: int = 1) -> FiniteRelation:
    """η as a relation on all objects, edges ``(a, b)`` for ``a η b``."""
    return FiniteRelation(tuple(S.objects), _index(S, op).edges)


def extensions(S, op: int = 1) -> tuple:
    """``rng(∂)`` in object order."""
    return _ordered(S, _index(S, op).rng)


def subset_eta(S, a, b, op: int = 1) -> bool:
    """``a ⊆_η b``; vacuously true when ``a`` has no η-members."""
    return eta_members(S, a, op) <= eta_members(S, b, op)


@dataclass(frozen=True)
class Undefined:
    """An undefined value carrying the reason."""

    reason: str

    def __bool__(self):
        return False


def sigma(S, x, op: int = 1):
    """The successor ``∂(F ∪ {x})`` for some ``F`` with ``∂(F) = x``.

    Returns an ``Undefined`` (never raises) when ``x`` is not an extension
    or no successor concept with an extension exists.  With several
    preimages the first successor in canonical concept order wins.
    """
    idx = _index(S, op)
    pre = idx.preimages.get(x)
    if not pre:
        return Undefined(NOT_AN_EXTENSION)
    for F in pre:
        G = F | {(x,)}
        if G in idx.table:
            return idx.table[G]
    return Undefined(SUCCESSOR_MISSING)


def sigma_contract_holds(S, x, op: int = 1) -> bool:
    """``z η σ(x)`` iff ``z η x`` or ``z = x``, for all ``z``; true when undefined."""
    y = sigma(S, x, op)
    if isinstance(y, Undefined):
        return True
    return eta_members(S, y, op) == eta_members(S, x, op) | {x}


# --- transitive closures


def trcl_eta_meta(S, x, op: int = 1) -> frozenset:
    """Objects reachable from ``x`` by a nonempty descending η-path."""
    below = _index(S, op).below
    seen: set = set()
    stack = list(below.get(x, ()))
    while stack:
        y = stack.pop()
        if y not in seen:
            seen.add(y)
            stack.extend(below[y])
    return frozenset(seen)


@dataclass(frozen=True)
class ObjectTrcl:
    """Result of the object-language transitive closure.

    ``members`` is None when the search was not settled (lazy backends).
    ``vacuous`` marks the empty intersection, which yields every object.
    """

    members: frozenset | None
    vacuous: bool = False
    qualifying: tuple = ()

    @property
    def unknown(self) -> bool:
        return self.members is None


def is_eta_transitive(S, F, op: int = 1) -> bool:
    below = _index(S, op).below
    F = _as_members(F)
    return all(below[b] <= F for b in F)


def _trcl_from_base(S, base: frozenset, op: int) -> ObjectTrcl:
    idx = _index(S, op)
    family, complete = S.domain(1)
    if not complete:
        return ObjectTrcl(None)
    result = None
    qualifying = []
    for F in family:
        if F not in idx.table:
            continue
        Fm = members(F)
        if not base <= idx.below[idx.table[F]]:
            continue
        if not all(idx.below[b] <= Fm for b in Fm):
            continue
        qualifying.append(F)
        result = Fm if result is None else result & Fm
    if result is None:
        return ObjectTrcl(frozenset(S.objects), vacuous=True)
    return ObjectTrcl(result, qualifying=tuple(qualifying))


def trcl_eta_object(S, x, op: int = 1) -> ObjectTrcl:
    """Intersection of all η-transitive ``F`` with ``x ⊆_η ∂(F)``.

    Only concepts in the domain of ``∂`` can qualify.
    """
    return _trcl_from_base(S, eta_members(S, x, op), op)


def tau_step(S, U, op: int = 1) -> frozenset:
    """η-members of members of ``U``."""
    below = _index(S, op).below
    out: set = set()
    for w in _as_members(U):
        out |= below.get(w, frozenset())
    return frozenset(out)


def tau_closure(S, U, op: int = 1) -> frozenset:
    """Union of ``τ^n(U)`` over ``n ≥ 0`` (``U`` itself included)."""
    total = frozenset(_as_members(U))
    frontier = total
    while frontier:
        frontier = tau_step(S, frontier, op) - total
        total |= frontier
    return total


# --- well-foundedness


def is_wf_meta(X, relation) -> bool:
    """Every nonempty subset of ``X`` has a least element (for finite ``X``: no cycle).

    ``relation`` holds pairs ``(z, y)`` meaning ``z`` lies below ``y``.
    """
    X = set(X)
    edges = frozenset((z, y) for z, y in relation if z in X and y in X)
    return find_cycle(FiniteRelation(tuple(X), edges)) is None


def is_wf_concept(S, X, R="eta", op: int = 1) -> Verdict:
    """Every nonempty subconcept of ``X`` has an ``R``-least element.

    ``R`` is ``"eta"`` or a set of pairs ``(z, y)`` meaning ``z`` is below
    ``y``.  Only concepts of ``S`` contained in ``X`` are inspected, so the
    answer may differ from the meta-level one; that divergence is flagged.
    """
    X = _as_members(X)
    if isinstance(R, str):
        if R != "eta":
            raise ExtractionError(f"unknown relation {R!r}")
        pairs = _index(S, op).edges
    else:
        pairs = frozenset(tuple(p) for p in R)
    below: dict = {}
    for z, y in pairs:
        below.setdefault(y, set()).add(z)
    with Timer() as timer:
        family, complete = S.domain(1)
        witness = None
        inspected = 0
        for F in family:
            Fm = members(F)
            if not Fm or not Fm <= X:
                continue
            inspected += 1
            if not any(not (below.get(y, set()) & Fm) for y in Fm):
                witness = {"subconcept": F}
                break
        if witness is not None:
            verdict = Verdict(FAILS, "wf-concept", witness)
        else:
            verdict = Verdict(HOLDS if complete else UNKNOWN, "wf-concept")
    meta = is_wf_meta(X, pairs)
    if meta != verdict.holds and not verdict.unknown:
        verdict.flags = ("meta/concept divergence",)
    verdict.bound = {"subconcepts": inspected, "complete": complete}
    verdict.elapsed = timer.elapsed
    verdict.detail = {"meta": meta}
    return verdict


def restricted_eta_witness(S, X, op: int = 1) -> Verdict:
    """Search ``concepts[2]`` for ``R`` with ``∂(R[a]) = a`` for every ``a`` in ``X``.

    ``R[a]`` is ``{b : R(a, b)}``, so on ``X`` the witness satisfies
    ``R(a, b)`` iff ``b η a``; its transpose is reported as ``E_X``.
    """
    idx = _index(S, op)
    X = _as_members(X)
    outside = X - idx.rng
    if outside:
        raise ExtractionError(f"X is not within rng(ext{op}): {sorted(map(str, outside))}")
    with Timer() as timer:
        found = None
        if not X:
            found = frozenset()
        else:
            for R in S.concepts.get(2, ()):
                rows: dict = {}
                for a, b in R:
                    if a in X:
                        rows.setdefault(a, set()).add((b,))
                if all(idx.table.get(frozenset(rows.get(a, ())), _MISSING) == a for a in X):
                    found = R
                    break
    if found is None:
        verdict = Verdict(FAILS, "restricted-eta", {"X": as_relation(X, 1)})
    else:
        E_X = frozenset((b, a) for a, b in found if a in X)
        verdict = Verdict(HOLDS, "restricted-eta", found, detail={"E_X": E_X})
    verdict.elapsed = timer.elapsed
    return verdict


_MISSING = object()


# --- well-founded extensions


@dataclass
class WfExt:
    """Well-founded extensions at one level, with reasons for every exclusion."""

    level: str
    members: tuple
    excluded: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    def __contains__(self, x) -> bool:
        return x in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def _render_set(objs) -> str:
    return "{" + ",".join(sorted(map(str, objs))) + "}"


def _wf_meta_one(S, x, op: int):
    idx = _index(S, op)
    if x not in idx.rng:
        return NOT_AN_EXTENSION
    closure = trcl_eta_meta(S, x, op) | {x}
    outside = closure - idx.rng
    if outside:
        return f"transitive closure leaves rng(ext{op}): {_render_set(outside)}"
    if x in trcl_eta_meta(S, x, op) or not is_wf_meta(closure, idx.edges):
        return "ill-founded: η-cycle below it"
    return None


def _wf_concept_one(S, x, op: int):
    idx = _index(S, op)
    flags = []
    if x not in idx.rng:
        return NOT_AN_EXTENSION, flags
    succ = sigma(S, x, op)
    if isinstance(succ, Undefined):
        # σ(x) is read through its defining condition: members of x plus x
        flags.append(f"successor undefined ({succ.reason}): contract reading")
        T = _trcl_from_base(S, idx.below[x] | {x}, op)
    else:
        T = trcl_eta_object(S, succ, op)
    if T.unknown:
        return "transitive closure unsettled", flags
    if T.vacuous:
        flags.append("vacuous Trcl: no qualifying concept")
    v = is_wf_concept(S, T.members, "eta", op)
    if v.fails:
        return f"not well-founded: subconcept {_render_set(members(v.witness['subconcept']))} has no least element", flags
    if "meta/concept divergence" in v.flags:
        flags.append("meta/concept divergence")
    outside = T.members - idx.rng
    if outside:
        return f"Trcl not within rng(ext{op}): {_render_set(outside)}", flags
    return None, flags


def wf_ext(S, level: str = META, op: int = 1) -> WfExt:
    """Extensions whose transitive closure is well-founded and made of extensions.

    ``level="concept"`` works inside the structure (σ, the object-language
    closure and subconcept well-foundedness); ``level="meta"`` uses paths,
    ``trcl(x) ∪ {x} ⊆ rng(∂)`` and acyclicity.
    """
    if level not in LEVELS:
        raise ExtractionError(f"level must be one of {LEVELS}")
    keep, excluded, flags = [], {}, {}
    for x in S.objects:
        if level == META:
            reason, fl = _wf_meta_one(S, x, op), []
        else:
            reason, fl = _wf_concept_one(S, x, op)
        if fl:
            flags[x] = fl
        if reason is None:
            keep.append(x)
        else:
            excluded[x] = reason
    return WfExt(level, tuple(keep), excluded, flags)


# --- embedding and collapse


@dataclass
class Embedding:
    """The partial map ``j`` from hereditarily finite sets to objects."""

    mapping: dict
    undefined: dict
    rank_bound: int
    violations: list = field(default_factory=list)

    def __getitem__(self, s):
        return self.mapping[s]

    def get(self, s, default=None):
        return self.mapping.get(s, default)

    @property
    def domain(self) -> list:
        return list(self.mapping)


def embed_j(S, rank_bound: int, op: int = 1) -> Embedding:
    """``j(x) = ∂({j(y) : y ∈ x})`` on sets of rank at most ``rank_bound``.

    Also records every pair of defined sets where ``y ∈ x`` and
    ``j(y) η j(x)`` disagree.
    """
    idx = _index(S, op)
    mapping: dict = {}
    undefined: dict = {}
    for x in hf_universe(rank_bound + 1):  # members come first in code order
        missing = [y for y in x if y not in mapping]
        if missing:
            undefined[x] = f"j undefined on member {format_hf(missing[0])}"
            continue
        concept = frozenset((mapping[y],) for y in x)
        if concept not in idx.table:
            if S.has_concept(concept, 1):
                undefined[x] = f"ext{op} undefined on {_render_set(members(concept))}"
            else:
                undefined[x] = f"{_render_set(members(concept))} is not a concept"
            continue
        mapping[x] = idx.table[concept]
    violations = []
    for x, jx in mapping.items():
        for y, jy in mapping.items():
            if (y in x) != (jy in idx.below[jx]):
                violations.append((y, x))
    return Embedding(mapping, undefined, rank_bound, violations)


@dataclass
class InnerModel:
    """The well-founded extensions of a structure under η, with their collapse."""

    carrier: tuple
    membership: FiniteRelation
    collapse: dict
    uncollapsed: dict
    level: str = META
    extensional: bool = True
    injective: bool = True
    order: tuple | None = None
    fragment: bool = False
    flags: tuple = ()

    def image(self) -> list:
        return sorted(set(self.collapse.values()))

    def is_transitive(self) -> bool:
        image = set(self.collapse.values())
        return all(e in image for s in image for e in s)

    def inverse(self) -> dict:
        """``π⁻¹`` when the collapse is injective."""
        if not self.injective:
            raise ExtractionError("collapse is not injective")
        return {v: k for k, v in self.collapse.items()}

    def to_text(self) -> str:
        lines = [f"{x} -> {format_hf(self.collapse[x])}" for x in self.carrier if x in self.collapse]
        lines += [f"{x} -> ? ({why})" for x, why in self.uncollapsed.items()]
        return "\n".join(lines) + ("\n" if lines else "")

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "carrier": [str(x) for x in self.carrier],
            "collapse": {str(x): format_hf(s) for x, s in self.collapse.items()},
            "image": [format_hf(s) for s in self.image()],
            "uncollapsed": {str(x): why for x, why in self.uncollapsed.items()},
            "extensional": self.extensional,
            "injective": self.injective,
            "edges": self.membership.to_text().splitlines(),
        }


def _cyclic_nodes(R: FiniteRelation) -> set:
    below = R.predecessors()
    bad = set()
    for x in R.nodes:
        seen, stack = set(), list(below[x])
        while stack:
            y = stack.pop()
            if y == x:
                bad.add(x)
                break
            if y not in seen:
                seen.add(y)
                stack.extend(below[y])
    return bad


def inner_model_from_relation(R: FiniteRelation, level: str = META, order=None, fragment=False, flags=()) -> InnerModel:
    """Collapse the well-founded part of ``R``; the rest is listed with reasons."""
    cyclic = _cyclic_nodes(R)
    below = R.predecessors()
    uncollapsed = {}
    good = []
    for x in R.nodes:
        if x in cyclic:
            uncollapsed[x] = "lies on an η-cycle"
            continue
        down = meta_below(below, x)
        hit = down & cyclic
        if hit:
            uncollapsed[x] = f"η-cycle below it through {_render_set(hit)}"
        else:
            good.append(x)
    pi = mostowski_collapse(R.restrict(good))
    injective = len(set(pi.values())) == len(pi)
    return InnerModel(
        carrier=tuple(R.nodes),
        membership=R,
        collapse=pi,
        uncollapsed=uncollapsed,
        level=level,
        extensional=is_extensional(R),
        injective=injective,
        order=order,
        fragment=fragment,
        flags=tuple(flags),
    )


def meta_below(below: dict, x) -> frozenset:
    seen: set = set()
    stack = list(below[x])
    while stack:
        y = stack.pop()
        if y not in seen:
            seen.add(y)
            stack.extend(below[y])
    return frozenset(seen)


def collapse_inner_model(S, level: str = META, op: int = 1) -> InnerModel:
    """``(wfExt, η)`` at ``level`` and its Mostowski collapse."""
    w = wf_ext(S, level, op)
    carrier = set(w.members)
    edges = frozenset((a, b) for a, b in _index(S, op).edges if a in carrier and b in carrier)
    R = FiniteRelation(w.members, edges)
    order = w.members if S.order is not None else None
    flags = sorted({f for fl in w.flags.values() for f in fl})
    return inner_model_from_relation(R, level, order=order, flags=flags)


# --- set axioms


class _Carrier:
    def __init__(self, im: InnerModel):
        self.nodes = list(im.carrier)
        self.pos = {x: i for i, x in enumerate(self.nodes)}
        n = len(self.nodes)
        self.n = n
        self.mem = np.zeros((n, n), dtype=bool)  # mem[a, b]: a ∈ b
        for a, b in im.membership.edges:
            self.mem[self.pos[a], self.pos[b]] = True
        self.by_members: dict = {}
        for j in range(n):
            self.by_members.setdefault(self._key(self.mem[:, j]), j)
        self.rank: list = [None] * n
        below = im.membership.predecessors()
        memo: dict = {}

        def height(x, trail=()):
            if x in memo:
                return memo[x]
            if x in trail:
                return None
            hs = [height(y, trail + (x,)) for y in below[x]]
            memo[x] = None if any(h is None for h in hs) else 1 + max(hs, default=-1)
            return memo[x]

        for i, x in enumerate(self.nodes):
            self.rank[i] = height(x)

    @staticmethod
    def _key(column) -> bytes:
        return np.packbits(column).tobytes()

    def find(self, column):
        return self.by_members.get(self._key(column))

    def name(self, i):
        return self.nodes[i]


def _too_high(rank, bound) -> bool:
    return bound is not None and rank is not None and rank >= bound


def _verdict(name, violations, checked, skipped, extra=None):
    bound = {"instances": checked, "skipped": skipped}
    if extra:
        bound.update(extra)
    if violations:
        return Verdict(FAILS, name, violations[0], bound=bound, detail={"violations": violations[:50], "count": len(violations)})
    return Verdict(HOLDS, name, bound=bound)


def _extensionality(C: _Carrier, rank_bound, depth):
    bad = []
    for j in range(C.n):
        k = C.find(C.mem[:, j])
        if k is not None and k != j:
            bad.append([C.name(k), C.name(j)])
    return _verdict("extensionality", bad, C.n, 0)


def _pairing(C: _Carrier, rank_bound, depth):
    bad, checked, skipped = [], 0, 0
    for i in range(C.n):
        for k in range(C.n):
            need = None if C.rank[i] is None or C.rank[k] is None else max(C.rank[i], C.rank[k]) + 1
            if _too_high(need, rank_bound):
                skipped += 1
                continue
            checked += 1
            if not (C.mem[i] & C.mem[k]).any():
                bad.append([C.name(i), C.name(k)])
    return _verdict("pairing", bad, checked, skipped)


def _union(C: _Carrier, rank_bound, depth):
    bad = []
    for j in range(C.n):
        inner = C.mem[:, C.mem[:, j]].any(axis=1)
        # some u contains every member of a member of a
        if inner.any() and not C.mem[inner].all(axis=0).any():
            bad.append(C.name(j))
    return _verdict("union", bad, C.n, 0)


def _membership_tables(C: _Carrier, variables, depth):
    from .logic.enumerate import Signature
    from .structures.definable import ReducedEnumeration

    S = SOStructure(
        range(C.n),
        constants={"In": (2, [(int(a), int(b)) for a, b in zip(*np.nonzero(C.mem))])},
    )
    sig = Signature(
        object_vars=tuple(variables),
        concept_consts=(("In", 2),),
        connectives=("not", "and"),
        quantifiers=("exists",),
        quantify_concepts=False,
        concept_equality=False,
    )
    enum = ReducedEnumeration(S, sig)
    for f, table, _free in enum.up_to(depth):
        yield f, enum._to_array(table)


def _separation(C: _Carrier, rank_bound, depth):
    from .logic.syntax import to_text

    bad, checked = [], 0
    for f, T in _membership_tables(C, ("z", "w"), depth):
        for a in range(C.n):
            for w in range(C.n):
                checked += 1
                target = C.mem[:, a] & T[:, w]
                if C.find(target) is None:
                    bad.append({"formula": to_text(f), "set": C.name(a), "parameter": C.name(w)})
    return _verdict("separation", bad, checked, 0, {"depth": depth})


def _collection(C: _Carrier, rank_bound, depth):
    from .logic.syntax import to_text

    bad, checked, skipped = [], 0, 0
    for f, T in _membership_tables(C, ("x", "y", "w"), depth):
        for u in range(C.n):
            xs = np.nonzero(C.mem[:, u])[0]
            for w in range(C.n):
                needs = [T[x, :, w] for x in xs if T[x, :, w].any()]
                if not needs:
                    checked += 1
                    continue
                lowest = [min((C.rank[y] for y in np.nonzero(W)[0]), key=lambda r: -1 if r is None else r) for W in needs]
                need = None if any(r is None for r in lowest) else max(lowest) + 1
                if _too_high(need, rank_bound):
                    skipped += 1
                    continue
                checked += 1
                ok = np.ones(C.n, dtype=bool)
                for W in needs:
                    ok &= C.mem[W].any(axis=0)
                if not ok.any():
                    bad.append({"formula": to_text(f), "set": C.name(u), "parameter": C.name(w)})
    return _verdict("collection", bad, checked, skipped, {"depth": depth})


def _foundation(C: _Carrier, rank_bound, depth):
    bad = []
    for j in range(C.n):
        a = C.mem[:, j]
        if not a.any():
            continue
        # some y ∈ a shares no member with a
        if not any(not (C.mem[:, y] & a).any() for y in np.nonzero(a)[0]):
            bad.append(C.name(j))
    edges = [(C.name(a), C.name(b)) for a, b in zip(*np.nonzero(C.mem))]
    cycle = find_cycle(FiniteRelation(tuple(C.nodes), frozenset(edges)))
    if cycle is not None and not bad:
        bad.append({"cycle": cycle})
    return _verdict("foundation", bad, C.n, 0)


def _infinity(C: _Carrier, im: InnerModel):
    for j in range(C.n):
        a = C.mem[:, j]
        if not any(not C.mem[:, e].any() for e in np.nonzero(a)[0]):
            continue
        closed = True
        for x in np.nonzero(a)[0]:
            succ = C.mem[:, x].copy()
            succ[x] = True
            s = C.find(succ)
            if s is None or not a[s]:
                closed = False
                break
        if closed:
            return Verdict(HOLDS, "infinity", C.name(j))
    if im.fragment:
        return Verdict(
            UNKNOWN, "infinity",
            detail={"caveat": "holds only in the infinite structure; a finite fragment cannot show it"},
        )
    return Verdict(FAILS, "infinity", detail={"caveat": "no finite carrier has an inductive set"})


def _well_ordering(C: _Carrier, im: InnerModel):
    if im.order is not None:
        return Verdict(HOLDS, "well-ordering", detail={"order": "global order restricted to the carrier"})
    if not im.uncollapsed and im.injective:
        return Verdict(HOLDS, "well-ordering", detail={"order": "canonical order of the collapse"}, flags=("canonical order",))
    return Verdict(UNKNOWN, "well-ordering", detail={"order": "no order available"})


_CHECKS = {
    "extensionality": _extensionality,
    "pairing": _pairing,
    "union": _union,
    "separation": _separation,
    "collection": _collection,
    "foundation": _foundation,
}


@dataclass
class AxiomReport:
    verdicts: dict
    never_at_finite_scale: tuple = NEVER_AT_FINITE_SCALE

    def __getitem__(self, name) -> Verdict:
        return self.verdicts[name]

    def __iter__(self):
        return iter(self.verdicts)

    def items(self):
        return self.verdicts.items()

    def to_json(self) -> dict:
        return {
            "axioms": {k: v.to_json() for k, v in self.verdicts.items()},
            "never_at_finite_scale": list(self.never_at_finite_scale),
        }


def check_set_axioms(im: InnerModel, axioms=AXIOMS, rank_bound: int | None = None, depth: int = 2) -> AxiomReport:
    """Bounded instance checks of set axioms on ``(carrier, η)``.

    Instances whose least possible witness has rank at least ``rank_bound``
    are skipped (pairing, collection), so a fragment ``V_r`` is judged only
    on what it could contain.  Schemas use formulas over ``∈`` with one
    parameter, up to ``depth`` connectives and quantifiers.
    """
    C = _Carrier(im)
    out = {}
    for name in axioms:
        if name not in AXIOMS:
            raise ExtractionError(f"unknown axiom {name!r}; known: {', '.join(AXIOMS)}")
        with Timer() as timer:
            if name == "infinity":
                v = _infinity(C, im)
            elif name == "well-ordering":
                v = _well_ordering(C, im)
            elif C.n == 0:
                v = Verdict(HOLDS, name, bound={"instances": 0, "skipped": 0})
            else:
                v = _CHECKS[name](C, rank_bound, depth)
        v.elapsed = timer.elapsed
        if rank_bound is not None:
            v.bound = dict(v.bound or {}, rank_bound=rank_bound)
        out[name] = v
    return AxiomReport(out)

