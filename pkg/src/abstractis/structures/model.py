"""Second-order structures: objects, concept families per arity, extension
operators and an optional strict total order.

Concepts are stored as frozensets of tuples (unary concepts hold 1-tuples).
Two backends share one interface: ``SOStructure`` lists everything, while
``LazyStructure`` enumerates its sorts on demand under a budget.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

HOLDS, FAILS, UNKNOWN = "Holds", "Fails", "Unknown"


class StructureError(ValueError):
    pass


class ExtUndefinedError(LookupError):
    """An extension operator was applied to a concept outside its domain."""

    def __init__(self, op: int, concept):
        self.op = op
        self.concept = concept
        super().__init__(f"ext{op} undefined on concept {render_concept(concept)}")


@dataclass
class Verdict:
    status: str
    schema: str = ""
    witness: object = None
    bound: object = None
    elapsed: float = 0.0
    flags: tuple = ()
    detail: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def unknown(self) -> bool:
        return self.status == UNKNOWN

    def to_json(self) -> dict:
        from ..render import jsonable

        out = {
            "schema": self.schema,
            "status": self.status,
            "witness": jsonable(self.witness),
            "bound": jsonable(self.bound),
            "elapsed": round(self.elapsed, 6),
        }
        if self.flags:
            out["flags"] = list(self.flags)
        if self.detail:
            out["detail"] = jsonable(self.detail)
        return out


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start

    def now(self) -> float:
        return time.perf_counter() - self.start


def render_concept(c) -> str:
    from ..render import render_value

    return render_value(c)


def as_relation(members: Iterable, arity: int = 1) -> frozenset:
    """Normalise an iterable of objects (arity 1) or tuples into a relation."""
    if arity == 1:
        return frozenset(m if isinstance(m, tuple) and len(m) == 1 else (m,) for m in members)
    out = frozenset(tuple(m) for m in members)
    for t in out:
        if len(t) != arity:
            raise StructureError(f"tuple {t!r} does not have arity {arity}")
    return out


def members(rel: frozenset) -> frozenset:
    """The objects of a unary relation."""
    return frozenset(t[0] for t in rel)


@dataclass(frozen=True)
class ExtOp:
    """A partial map from ``arity``-ary concepts to objects."""

    arity: int
    table: dict

    def __call__(self, concept):
        try:
            return self.table[concept]
        except KeyError:
            raise ExtUndefinedError(0, concept) from None

    def defined(self, concept) -> bool:
        return concept in self.table

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def preimages(self) -> dict:
        out: dict = {}
        for c, o in self.table.items():
            out.setdefault(o, []).append(c)
        return out

    def __hash__(self):
        return hash((self.arity, frozenset(self.table.items())))


class SOStructure:
    """An exhaustively listed structure.

    ``concepts`` maps arity to an iterable of relations.  ``ext`` is a list of
    ``ExtOp`` (or ``(arity, table)`` pairs).  ``order`` lists the objects in
    increasing order; when given it also fixes the enumeration order.
    ``constants`` maps a name to ``(arity, relation)``; such concepts may be
    used as free symbols in formulas without belonging to any family.
    """

    lazy = False

    def __init__(
        self,
        objects: Iterable,
        concepts: dict | None = None,
        ext: Iterable = (),
        order: Iterable | None = None,
        constants: dict | None = None,
        name: str = "",
    ):
        objs = tuple(objects)
        if len(set(objs)) != len(objs):
            raise StructureError("duplicate objects")
        self.order = tuple(order) if order is not None else None
        if self.order is not None:
            if len(self.order) != len(objs) or set(self.order) != set(objs):
                raise StructureError("order must list every object exactly once")
            objs = self.order
        self.objects = objs
        self.index = {o: i for i, o in enumerate(objs)}
        self.name = name
        self.concepts: dict[int, tuple] = {}
        for arity, family in (concepts or {}).items():
            arity = int(arity)
            rels = [as_relation(c, arity) for c in family]
            if len(set(rels)) != len(rels):
                raise StructureError(f"duplicate concept in arity {arity}")
            for r in rels:
                for t in r:
                    for a in t:
                        if a not in self.index:
                            raise StructureError(f"concept mentions unknown object {a!r}")
            self.concepts[arity] = tuple(sorted(rels, key=self.concept_code))
        self._concept_sets = {n: frozenset(fam) for n, fam in self.concepts.items()}
        ops = []
        for op in ext:
            if not isinstance(op, ExtOp):
                arity, table = op
                op = ExtOp(arity, {as_relation(k, arity): v for k, v in dict(table).items()})
            for c, o in op.table.items():
                if c not in self._concept_sets.get(op.arity, ()):
                    raise StructureError(f"extension operator defined on a concept outside concepts[{op.arity}]")
                if o not in self.index:
                    raise StructureError(f"extension value {o!r} is not an object")
            ops.append(op)
        self.ext = tuple(ops)
        self.constants = {
            cname: (int(arity), as_relation(rel, int(arity)))
            for cname, (arity, rel) in (constants or {}).items()
        }

    # --- sorts
    def domain(self, arity: int, budget: int | None = None) -> tuple[list, bool]:
        """Elements of sort ``arity`` (0 = objects) and whether the list is complete."""
        if arity == 0:
            return list(self.objects), True
        return list(self.concepts.get(arity, ())), True

    def has_concept(self, rel, arity: int) -> bool:
        return rel in self._concept_sets.get(arity, ())

    def make_concept(self, rel: frozenset, arity: int):
        return rel

    def concept_code(self, rel: frozenset) -> int:
        """Bit-vector code of a relation: tuple positions in lexicographic order."""
        n = len(self.objects)
        code = 0
        for t in rel:
            pos = 0
            for a in t:
                pos = pos * n + self.index[a]
            code |= 1 << pos
        return code

    def less(self, a, b) -> bool:
        if self.order is None:
            raise StructureError("structure has no order")
        return self.index[a] < self.index[b]

    def ext_value(self, i: int, concept):
        """``ext<i>`` applied to ``concept`` (1-based operator index)."""
        if i < 1 or i > len(self.ext):
            raise StructureError(f"structure has no operator ext{i}")
        op = self.ext[i - 1]
        try:
            return op.table[concept]
        except KeyError:
            raise ExtUndefinedError(i, concept) from None

    def ext_defined(self, i: int, concept) -> bool:
        return 1 <= i <= len(self.ext) and concept in self.ext[i - 1].table

    def ext_arity(self, i: int) -> int:
        return self.ext[i - 1].arity

    def ext_arities(self) -> dict:
        return {i: op.arity for i, op in enumerate(self.ext, start=1)}

    def constant(self, name: str):
        return self.constants[name]

    # --- derived structures
    def replace(self, **changes) -> "SOStructure":
        args = dict(
            objects=self.objects,
            concepts=self.concepts,
            ext=self.ext,
            order=self.order,
            constants=dict(self.constants),
            name=self.name,
        )
        args.update(changes)
        return SOStructure(**args)

    def max_arity(self) -> int:
        return max(self.concepts, default=0)

    def __repr__(self):
        sizes = {n: len(f) for n, f in sorted(self.concepts.items())}
        return f"SOStructure({self.name or '?'}: |M|={len(self.objects)}, concepts={sizes}, ext={len(self.ext)})"


def powerset_family(objects: Iterable, arity: int = 1) -> list[frozenset]:
    tuples = list(itertools.product(tuple(objects), repeat=arity))
    return [
        frozenset(t for bit, t in enumerate(tuples) if mask >> bit & 1)
        for mask in range(1 << len(tuples))
    ]


@dataclass
class LazySort:
    """A possibly infinite sort: a membership test plus an indexed enumerator."""

    contains: Callable[[object], bool]
    enumerate: Callable[[], Iterator]
    finite_size: int | None = None


class LazyStructure:
    """A structure whose sorts are enumerated under a budget.

    ``ext`` holds ``(arity, function)`` pairs; functions raise
    ``ExtUndefinedError`` off their domain.  ``concept_factory[n]`` converts a
    frozenset of ``n``-tuples into the family's native representation.
    """

    lazy = True

    def __init__(
        self,
        objects: LazySort,
        concepts: dict,
        ext: Iterable = (),
        less: Callable | None = None,
        concept_factory: dict | None = None,
        constants: dict | None = None,
        budget: int = 64,
        name: str = "",
        flags: tuple = (),
    ):
        self.objects_sort = objects
        self.concept_sorts = dict(concepts)
        self.ext_fns = tuple(ext)
        self._less = less
        self.concept_factory = dict(concept_factory or {})
        self.constants = dict(constants or {})
        self.budget = budget
        self.name = name
        self.flags = tuple(flags)
        self.order = () if less is not None else None
        self._domains: dict = {}

    def domain(self, arity: int, budget: int | None = None) -> tuple[list, bool]:
        sort = self.objects_sort if arity == 0 else self.concept_sorts.get(arity)
        if sort is None:
            return [], True
        limit = self.budget if budget is None else budget
        cached = self._domains.get((arity, limit))
        if cached is None:
            items = list(itertools.islice(sort.enumerate(), limit + 1))
            cached = (items[:limit], False) if len(items) > limit else (items, True)
            self._domains[(arity, limit)] = cached
        return list(cached[0]), cached[1]

    def has_concept(self, rel, arity: int) -> bool:
        sort = self.concept_sorts.get(arity)
        return sort is not None and sort.contains(rel)

    def has_object(self, x) -> bool:
        return self.objects_sort.contains(x)

    def make_concept(self, rel: frozenset, arity: int):
        factory = self.concept_factory.get(arity)
        return factory(rel) if factory else rel

    def less(self, a, b) -> bool:
        if self._less is None:
            raise StructureError("structure has no order")
        return self._less(a, b)

    def ext_value(self, i: int, concept):
        if i < 1 or i > len(self.ext_fns):
            raise StructureError(f"structure has no operator ext{i}")
        return self.ext_fns[i - 1][1](concept)

    def ext_defined(self, i: int, concept) -> bool:
        try:
            self.ext_value(i, concept)
        except ExtUndefinedError:
            return False
        return True

    def ext_arity(self, i: int) -> int:
        return self.ext_fns[i - 1][0]

    def ext_arities(self) -> dict:
        return {i: a for i, (a, _) in enumerate(self.ext_fns, start=1)}

    def constant(self, name: str):
        return self.constants[name]

    def with_budget(self, budget: int) -> "LazyStructure":
        out = LazyStructure.__new__(LazyStructure)
        out.__dict__.update(self.__dict__)
        out.budget = budget
        out._domains = {}
        return out

    def __repr__(self):
        return f"LazyStructure({self.name or '?'}, budget={self.budget})"
