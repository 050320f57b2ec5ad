"""Definable relations, the Defn hierarchy, definable closure and codes.

Two engines live here.

``definable_relations`` computes the partition of ``M^k`` into tuples that
no formula distinguishes, by refining atomic types of ``w``-tuples until
stable: a tuple's new label collects, for every position, the *set* of
labels reachable by re-choosing that coordinate.  This is exactly
``w``-variable equivalence; with ``w >= |M| + k`` it coincides with full
first-order equivalence, so the definable relations are precisely the
unions of blocks.  Concept sorts are handled by adding concepts as extra
elements, with predication and extension graphs as relations.

``formula_tables`` evaluates enumerated formulas over a fixed variable pool
as numpy boolean arrays (one axis per pool variable), which makes
enumeration-based closure and code surjection cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..hf import HFSet
from ..logic.enumerate import Signature
from ..logic.syntax import (
    And,
    ConceptEq,
    ConceptVar,
    Eq,
    Exists,
    Ext,
    Forall,
    Iff,
    Implies,
    Less,
    Not,
    ObjConst,
    ObjVar,
    Or,
    Pred,
)
from .model import SOStructure, StructureError

DEFAULT_CELL_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


# --- partition refinement ------------------------------------------------------


def _combine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    key = a.astype(np.int64) * (int(b.max(initial=0)) + 1) + b
    _, inv = np.unique(key.ravel(), return_inverse=True)
    return inv.reshape(a.shape)


def _count(labels: np.ndarray) -> int:
    return int(labels.max(initial=-1)) + 1


@dataclass
class _Universe:
    size: int
    n_objects: int
    elements: list
    sort: np.ndarray
    relations: list  # boolean arrays of various arities
    less: np.ndarray | None
    param: np.ndarray


def _build_universe(S: SOStructure, params, second_order: bool) -> _Universe:
    objs = list(S.objects)
    n = len(objs)
    elements = [("o", o) for o in objs]
    sorts = [0] * n
    if second_order:
        for arity in sorted(S.concepts):
            for c in S.concepts[arity]:
                elements.append(("c", arity, c))
                sorts.append(arity)
    N = len(elements)
    pos = {e: i for i, e in enumerate(elements)}
    rels = []
    # named concepts are fixed relations on objects
    named = [S.constants[name] for name in sorted(S.constants)]
    param_objs = list(params or ())
    for arity, rel in named:
        arr = np.zeros((N,) * arity, dtype=bool)
        for t in rel:
            arr[tuple(S.index[a] for a in t)] = True
        rels.append(arr)
    # extension values of named concepts are themselves nameable objects
    extra_named = [op.table[rel] for op in S.ext for arity, rel in named if rel in op.table]
    if second_order:
        for arity in sorted(S.concepts):
            arr = np.zeros((N,) * (arity + 1), dtype=bool)
            for c in S.concepts[arity]:
                ci = pos[("c", arity, c)]
                for t in c:
                    arr[(ci,) + tuple(S.index[a] for a in t)] = True
            rels.append(arr)
        for op in S.ext:
            arr = np.zeros((N, N), dtype=bool)
            for c, o in op.table.items():
                arr[pos[("c", op.arity, c)], S.index[o]] = True
            rels.append(arr)
    less = None
    if S.order is not None:
        less = np.zeros((N, N), dtype=bool)
        for i in range(n):
            less[i, i + 1:n] = True
    param = np.full(N, -1, dtype=np.int64)
    for j, o in enumerate(param_objs + extra_named):
        if param[S.index[o]] < 0:
            param[S.index[o]] = j
    return _Universe(N, n, elements, np.array(sorts, dtype=np.int64), rels, less, param)


def _initial_labels(U: _Universe, w: int) -> np.ndarray:
    shape = (U.size,) * w
    idx = np.indices(shape, dtype=np.int64)
    labels = np.zeros(shape, dtype=np.int64)
    for i in range(w):
        labels = _combine(labels, U.sort[idx[i]] * (U.param.max(initial=-1) + 2) + U.param[idx[i]] + 1)
    for i, j in itertools.combinations(range(w), 2):
        labels = _combine(labels, (idx[i] == idx[j]).astype(np.int64))
    if U.less is not None:
        for i, j in itertools.permutations(range(w), 2):
            labels = _combine(labels, U.less[idx[i], idx[j]].astype(np.int64))
    for rel in U.relations:
        for positions in itertools.product(range(w), repeat=rel.ndim):
            labels = _combine(labels, rel[tuple(idx[p] for p in positions)].astype(np.int64))
    return labels


def _refine(labels: np.ndarray, w: int, N: int) -> np.ndarray:
    while True:
        new = labels
        for i in range(w):
            moved = np.moveaxis(labels, i, -1).reshape(-1, N)
            s = np.sort(moved, axis=1)
            if N > 1:
                dup = np.zeros_like(s, dtype=bool)
                dup[:, 1:] = s[:, 1:] == s[:, :-1]
                s = np.where(dup, -1, s)
                s.sort(axis=1)
            _, sig = np.unique(s, axis=0, return_inverse=True)
            sig = np.expand_dims(sig.reshape((N,) * (w - 1)), i)
            new = _combine(new, np.broadcast_to(sig, labels.shape))
        if _count(new) == _count(labels):
            return new
        labels = new


@dataclass
class DefinableFamily:
    """The definable ``arity``-ary relations: all unions of ``blocks``."""

    arity: int
    objects: tuple
    blocks: list
    exact: bool
    width: int
    params: object = None
    second_order: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {t: b for b, block in enumerate(self.blocks) for t in block}

    def __len__(self) -> int:
        return 1 << len(self.blocks)

    def contains(self, rel) -> bool:
        """Is ``rel`` a union of blocks?"""
        rel = frozenset(rel)
        hit = {}
        for t in rel:
            b = self._index.get(t)
            if b is None:
                return False
            hit[b] = hit.get(b, 0) + 1
        return all(len(self.blocks[b]) == k for b, k in hit.items())

    def relations(self, limit: int = 1 << 16) -> list:
        if len(self) > limit:
            raise BudgetExceeded(f"{len(self)} definable relations exceed the listing limit {limit}")
        out = []
        for mask in range(len(self)):
            out.append(frozenset().union(*(self.blocks[b] for b in range(len(self.blocks)) if mask >> b & 1)))
        return out


def definable_relations(
    S: SOStructure,
    arity: int = 1,
    params="none",
    second_order: bool = False,
    width: int | None = None,
    budget: int = DEFAULT_CELL_BUDGET,
    sorts: tuple | None = None,
) -> DefinableFamily:
    """Partition of ``M^arity`` whose unions are exactly the definable relations.

    ``params`` is ``"none"``, ``"all"`` or an iterable of objects usable as
    parameters.  With ``second_order`` concept quantifiers (over the
    structure's families) and extension terms are available.  ``sorts``
    gives each coordinate a sort (0 for objects, ``n`` for ``concepts[n]``);
    concept coordinates imply ``second_order``.
    """
    if S.lazy:
        raise StructureError("definable_relations needs an exhaustive structure")
    sorts = tuple(sorts) if sorts is not None else (0,) * arity
    arity = len(sorts)
    if arity < 1:
        raise ValueError("arity must be >= 1")
    if any(sorts):
        second_order = True
    objs = tuple(S.objects)
    n = len(objs)
    pset = "all" if params == "all" else tuple(() if params in (None, "none") else params)
    pools = [list(objs) if s == 0 else list(S.concepts.get(s, ())) for s in sorts]
    tuples = list(itertools.product(*pools))
    if not tuples:
        return DefinableFamily(arity, objs, [], True, 0, pset, second_order)
    if pset == "all" or (pset and set(pset) >= set(objs)):
        return DefinableFamily(arity, objs, [frozenset([t]) for t in tuples], True, arity, pset, second_order)
    U = _build_universe(S, pset, second_order)
    N = U.size
    wanted = width if width is not None else n + arity
    fit = max(1, int(math.floor(math.log(budget) / math.log(N)))) if N > 1 else wanted
    w = max(arity, min(wanted, fit))
    if N ** w > budget:
        raise BudgetExceeded(f"{N}^{w} cells exceed the budget {budget}")
    labels = _refine(_initial_labels(U, w), w, N)
    offsets = {0: 0}
    start = n
    for a in sorted(S.concepts):
        if second_order:
            offsets[a] = start
            start += len(S.concepts[a])
    grids = np.indices(tuple(len(p) for p in pools), dtype=np.int64)
    pick = [grids[i] + offsets[s] for i, s in enumerate(sorts)]
    pick += [pick[-1]] * (w - arity)
    lab = labels[tuple(pick)].ravel()
    groups: dict = {}
    for t, label in zip(tuples, lab.tolist()):
        groups.setdefault(label, []).append(t)
    blocks = [frozenset(v) for v in groups.values()]
    first = {t: i for i, t in enumerate(tuples)}
    blocks.sort(key=lambda b: min(first[t] for t in b))
    exact = w >= n + arity or all(len(b) == 1 for b in blocks)
    return DefinableFamily(arity, objs, blocks, exact, w, pset, second_order)


# --- the Defn hierarchy -----------------------------------------------------------


def membership_structure(sets) -> SOStructure:
    """``(X, ∈)`` for a list of HF sets, with membership as the constant ``In``."""
    objs = sorted(set(sets))
    rel = {(a, b) for a in objs for b in objs if a in b}
    return SOStructure(objs, {}, constants={"In": (2, rel)}, name="membership")


def defn_step(S: SOStructure, params="all", second_order: bool = False, budget: int = DEFAULT_CELL_BUDGET) -> SOStructure:
    """Replace ``concepts[1]`` by the definable unary relations of ``S``."""
    fam = definable_relations(S, 1, params=params, second_order=second_order, budget=budget)
    concepts = dict(S.concepts)
    concepts[1] = fam.relations()
    return S.replace(concepts=concepts, ext=())


@dataclass
class DefnLevel:
    index: int
    size: int
    powerset_size: int
    equal_to_powerset: bool
    exact: bool
    sets: list


def defn_iterate(base, k: int, params="all", budget: int = DEFAULT_CELL_BUDGET) -> list[DefnLevel]:
    """Iterate ``X -> {definable subsets of (X, ∈)}`` ``k`` times from ``base``.

    Each level is compared with the same number of powerset steps.
    """
    level = sorted(set(base))
    power = list(level)
    out = [DefnLevel(0, len(level), len(power), set(level) == set(power), True, level)]
    for i in range(1, k + 1):
        S = membership_structure(level)
        fam = definable_relations(S, 1, params=params, budget=budget)
        level = sorted(HFSet(t[0] for t in rel) for rel in fam.relations())
        power = sorted(HFSet(c) for r in range(len(power) + 1) for c in itertools.combinations(power, r))
        out.append(DefnLevel(i, len(level), len(power), set(level) == set(power), fam.exact, level))
    return out


# --- vectorised evaluation over a variable pool --------------------------------------


class _Undefined(Exception):
    pass


class FormulaTables:
    """Boolean tables of formulas over every assignment to a variable pool.

    Axis ``j`` ranges over the objects (for object variables) or over
    ``concepts[arity]`` (for concept variables).  Formulas whose extension
    terms can leave an operator's domain get no table.
    """

    def __init__(self, S: SOStructure, object_vars, concept_vars):
        self.S = S
        self.axes = [(v, 0) for v in object_vars] + list(concept_vars)
        self.axis_of = {}
        for j, (v, a) in enumerate(self.axes):
            self.axis_of[v if a == 0 else (v, a)] = j
        self.sizes = [len(S.objects) if a == 0 else len(S.concepts.get(a, ())) for _, a in self.axes]
        self.ndim = len(self.axes)
        # concept index space per arity: family first, then named constants
        self.cidx: dict = {}
        self.clist: dict = {}
        for a, fam in S.concepts.items():
            self.clist[a] = list(fam)
        for name, (a, rel) in sorted(S.constants.items()):
            self.clist.setdefault(a, [])
            if rel not in self.clist[a]:
                self.clist[a].append(rel)
        for a, lst in self.clist.items():
            self.cidx[a] = {c: i for i, c in enumerate(lst)}
        n = len(S.objects)
        self.member = {}
        for a, lst in self.clist.items():
            arr = np.zeros((len(lst),) + (n,) * a, dtype=bool)
            for ci, c in enumerate(lst):
                for t in c:
                    arr[(ci,) + tuple(S.index[x] for x in t)] = True
            self.member[a] = arr
        self.ext = []
        for op in S.ext:
            lst = self.clist.get(op.arity, [])
            self.ext.append(np.array([S.index[op.table[c]] if c in op.table else -1 for c in lst], dtype=np.int64))
        self.memo: dict = {}

    def _axis_range(self, j: int) -> np.ndarray:
        shape = [1] * self.ndim
        shape[j] = self.sizes[j]
        return np.arange(self.sizes[j], dtype=np.int64).reshape(shape)

    def _term(self, t):
        if isinstance(t, ObjVar):
            return self._axis_range(self.axis_of[t.name])
        if isinstance(t, ObjConst):
            return np.int64(self.S.index[t.value])
        if isinstance(t, Ext):
            c = self._concept(t.arg)
            vals = self.ext[t.op - 1][c]
            if np.any(vals < 0):
                raise _Undefined()
            return vals
        raise TypeError(t)

    def _concept(self, c):
        if isinstance(c, ConceptVar):
            j = self.axis_of.get((c.name, c.arity))
            if j is not None:
                return self._axis_range(j)
            const = self.S.constants.get(c.name)
            if const is None or const[0] != c.arity:
                raise StructureError(f"unknown concept {c.name}:{c.arity}")
            return np.int64(self.cidx[c.arity][const[1]])
        raise StructureError("application terms are not supported in tables")

    def table(self, f):
        """Boolean array broadcastable to the pool shape, or ``None``."""
        key = id(f)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[1]
        try:
            value = self._table(f)
        except _Undefined:
            value = None
        self.memo[key] = (f, value)
        return value

    def _table(self, f):
        if isinstance(f, Eq):
            return np.asarray(self._term(f.left) == self._term(f.right))
        if isinstance(f, Less):
            return np.asarray(self._term(f.left) < self._term(f.right))
        if isinstance(f, ConceptEq):
            return np.asarray(self._concept(f.left) == self._concept(f.right))
        if isinstance(f, Pred):
            c = self._concept(f.concept)
            args = [self._term(a) for a in f.args]
            return np.asarray(self.member[f.concept.arity][(c, *args)])
        if isinstance(f, Not):
            b = self.table(f.body)
            if b is None:
                raise _Undefined()
            return ~b
        if isinstance(f, (And, Or, Implies, Iff)):
            a, b = self.table(f.left), self.table(f.right)
            if a is None or b is None:
                raise _Undefined()
            if isinstance(f, And):
                return a & b
            if isinstance(f, Or):
                return a | b
            if isinstance(f, Implies):
                return ~a | b
            return a == b
        if isinstance(f, (Forall, Exists)):
            b = self.table(f.body)
            if b is None:
                raise _Undefined()
            j = self.axis_of[f.var if f.arity == 0 else (f.var, f.arity)]
            if b.shape[j] == 1 and self.sizes[j] > 0:
                return b
            if self.sizes[j] == 0:
                shape = list(b.shape)
                shape[j] = 1
                return np.full(shape, isinstance(f, Forall))
            return b.all(axis=j, keepdims=True) if isinstance(f, Forall) else b.any(axis=j, keepdims=True)
        raise TypeError(f)


def closure_signature(S: SOStructure, params=()) -> Signature:
    """The enumeration signature used for closure and codes over ``S``."""
    return Signature(
        object_vars=("x",),
        concept_vars=tuple((f"X{a}" if a > 1 else "X", a) for a in sorted(S.concepts) if S.concepts[a]),
        object_consts=tuple(params),
        concept_consts=tuple((name, a) for name, (a, _) in sorted(S.constants.items())),
        ext_arities=tuple(op.arity for op in S.ext),
        order=S.order is not None,
        connectives=("not", "and"),
        quantifiers=("exists",),
    )


class ReducedEnumeration:
    """Formulas by size, keeping one formula per (truth table, free variables).

    Two formulas with the same table over the pool and the same free
    variables are interchangeable as subformulas, so discarding the later one
    loses no table reachable within the size bound.  Tables are Python ints
    with one bit per pool assignment (C order over the pool axes).
    """

    def __init__(self, S: SOStructure, sig: Signature):
        from ..logic.enumerate import atoms
        from ..logic.syntax import free_variables

        self.S = S
        self.sig = sig
        self.tables = FormulaTables(S, sig.object_vars, sig.concept_vars)
        self.shape = tuple(self.tables.sizes)
        self.cells = int(np.prod(self.shape, dtype=np.int64))
        self.full = (1 << self.cells) - 1
        self.seen: set = set()
        self.levels: list[list] = []
        level = []
        for f in atoms(sig):
            t = self.tables.table(f)
            if t is None:
                continue
            objs, cons = free_variables(f)
            self._add(level, f, self._to_int(t), frozenset(objs) | frozenset(cons))
        self.levels.append(level)

    def _to_int(self, arr) -> int:
        full = np.broadcast_to(np.asarray(arr, dtype=bool), self.shape).ravel()
        return int.from_bytes(np.packbits(full, bitorder="little").tobytes(), "little")

    def _to_array(self, value: int) -> np.ndarray:
        raw = np.frombuffer(value.to_bytes((self.cells + 7) // 8 or 1, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.cells].astype(bool).reshape(self.shape)

    def _add(self, level, f, table, free):
        key = (table, free)
        if key not in self.seen:
            self.seen.add(key)
            level.append((f, table, free))

    def grow(self):
        s = len(self.levels)
        level: list = []
        if "not" in self.sig.connectives:
            for f, t, fr in self.levels[s - 1]:
                self._add(level, Not(f), self.full ^ t, fr)
        ops = {
            "and": (And, lambda a, b: a & b),
            "or": (Or, lambda a, b: a | b),
            "implies": (Implies, lambda a, b: (self.full ^ a) | b),
            "iff": (Iff, lambda a, b: self.full ^ (a ^ b)),
        }
        for name in self.sig.connectives:
            if name not in ops:
                continue
            cls, op = ops[name]
            for k in range(s):
                for f, t, fr in self.levels[k]:
                    for g, u, gr in self.levels[s - 1 - k]:
                        self._add(level, cls(f, g), op(t, u), fr | gr)
        binders = [(v, 0) for v in self.sig.object_vars]
        if self.sig.quantify_concepts:
            binders += list(self.sig.concept_vars)
        for q in self.sig.quantifiers:
            cls = Exists if q == "exists" else Forall
            for var, arity in binders:
                j = self.tables.axis_of[var if arity == 0 else (var, arity)]
                bound = var if arity == 0 else (var, arity)
                for f, t, fr in self.levels[s - 1]:
                    arr = self._to_array(t)
                    red = arr.any(axis=j, keepdims=True) if cls is Exists else arr.all(axis=j, keepdims=True)
                    if self.shape[j] == 0:
                        red = np.full(red.shape, cls is Forall)
                    self._add(level, cls(var, arity, f), self._to_int(red), fr - {bound})
        self.levels.append(level)

    def up_to(self, depth: int):
        while len(self.levels) <= depth:
            self.grow()
        for level in self.levels[: depth + 1]:
            yield from level

    def column(self, table: int, axis: int) -> np.ndarray:
        arr = self._to_array(table)
        return np.moveaxis(arr, axis, 0).reshape(self.shape[axis], -1)[:, 0]


def unique_solutions(S: SOStructure, depth: int, params=(), sig: Signature | None = None):
    """Yield ``(index, formula, solution)`` for formulas ``φ(x)`` with one solution.

    Formulas come from the reduced enumeration; only those whose sole free
    variable is ``x`` count, and ``params`` enter as object constants.
    ``index`` is the position in that enumeration and fixes code order.
    """
    sig = sig or closure_signature(S, params)
    if not S.objects:
        return
    enum = ReducedEnumeration(S, sig)
    xaxis = enum.tables.axis_of["x"]
    allowed = frozenset({"x"}) | frozenset(sig.concept_consts)
    for index, (f, table, free) in enumerate(enum.up_to(depth)):
        if not free <= allowed:
            continue
        hits = np.flatnonzero(enum.column(table, xaxis))
        if len(hits) == 1:
            yield index, f, S.objects[int(hits[0])]


def definable_closure(S: SOStructure, A=(), depth: int = 3) -> frozenset:
    """Objects that are the unique solution of some enumerated formula over ``A``."""
    if S.lazy:
        raise StructureError("definable_closure needs an exhaustive structure")
    A = tuple(a for a in S.objects if a in set(A))
    if set(A) == set(S.objects):
        return frozenset(S.objects)
    found = set(A)
    for _, _, a in unique_solutions(S, depth, A):
        found.add(a)
        if len(found) == len(S.objects):
            break
    return frozenset(found)


@dataclass
class CodeSurjection:
    """Codes ``(formula index, params)`` with their values.

    ``theta`` maps each code to the unique solution of its formula;
    ``iota`` picks, for each covered object, its least code.
    """

    codes: list
    formulas: dict
    theta: dict
    iota: dict
    uncovered: list
    depth: int

    def formula_text(self, code) -> str:
        from ..logic.syntax import to_text

        return to_text(self.formulas[code[0]])


def code_surjection(S: SOStructure, depth: int = 3, params=()) -> CodeSurjection:
    params = tuple(params)
    codes, formulas, theta, iota = [], {}, {}, {}
    for index, f, a in unique_solutions(S, depth, params):
        code = (index, params)
        codes.append(code)
        formulas[index] = f
        theta[code] = a
        iota.setdefault(a, code)
    uncovered = [a for a in S.objects if a not in iota]
    return CodeSurjection(codes, formulas, theta, iota, uncovered, depth)


def theta(S: SOStructure, formula, var: str = "x"):
    """The unique ``a`` with ``S |= formula(a)``, or ``None``."""
    from .evaluate import truth

    sols = [a for a in S.objects if truth(S, formula, {var: a}) is True]
    return sols[0] if len(sols) == 1 else None
