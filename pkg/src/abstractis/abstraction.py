"""Abstraction principles: checking equivalences and building their operators.

An operator for an equivalence ``E`` on ``m``-ary concepts sends each
concept to an object standing for its ``E``-class: ``ℓ(X)`` is the least
member of the class in the canonical concept order, and ``∂_E(X) = ι(ℓ(X))``
for an injection ``ι`` from representatives into objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .logic.classify import classify
from .logic.parser import parse
from .logic.syntax import free_variables, mentions_ext, to_text
from .structures.evaluate import compile_formula
from .structures.model import FAILS, HOLDS, UNKNOWN, ExtOp, ExtUndefinedError, SOStructure, Timer, Verdict


class AbstractionError(ValueError):
    pass


def _equality(a, b):
    return a == b


def _equinumerosity(a, b):
    return len(a) == len(b)


def _sym_diff_parity(a, b):
    return len(a ^ b) % 2 == 0


BUILTIN_ORACLES: dict[str, Callable] = {
    "equality": _equality,
    "equinumerosity": _equinumerosity,
    "same_symmetric_difference_parity": _sym_diff_parity,
}


@dataclass
class AbstractionSpec:
    """An equivalence ``E`` on ``arity``-ary concepts and how to realise ``ι``.

    ``E`` is a formula (or its text) in two free concept variables, a builtin
    oracle name, or a callable ``(concept, concept) -> bool``.  ``mode`` is
    ``"fresh"`` (new objects per class) or ``"reuse"`` with ``iota`` mapping
    representatives to existing objects.
    """

    E: object
    arity: int = 1
    mode: str = "fresh"
    iota: dict | None = None
    variables: tuple = ("X", "Y")
    name: str = ""
    _formula: object = field(default=None, init=False, repr=False)
    _oracle: Callable | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.mode not in ("fresh", "reuse"):
            raise AbstractionError(f"unknown mode {self.mode!r}")
        E = self.E
        if isinstance(E, str) and E in BUILTIN_ORACLES:
            self._oracle = BUILTIN_ORACLES[E]
            self.name = self.name or E
        elif callable(E):
            self._oracle = E
            self.name = self.name or getattr(E, "__name__", "oracle")
        else:
            if isinstance(E, str):
                E = parse(E, arities={v: self.arity for v in self.variables})
            if mentions_ext(E):
                raise AbstractionError("an equivalence formula may not mention extension operators")
            objs, cons = free_variables(E)
            expected = {(v, self.arity) for v in self.variables}
            if objs or not cons <= expected:
                raise AbstractionError(
                    f"E must have exactly the free concept variables {sorted(self.variables)} "
                    f"of arity {self.arity}; found objects {sorted(objs)} and concepts {sorted(cons)}"
                )
            self._formula = E
            self.name = self.name or to_text(E)

    @property
    def semantic(self) -> bool:
        return self._oracle is not None

    def describe(self) -> dict:
        out = {"name": self.name, "arity": self.arity, "mode": self.mode}
        if self.semantic:
            out["E"] = "semantic E"
        else:
            out["E"] = to_text(self._formula)
            out["class"] = classify(self._formula)
        return out

    def relation(self, S) -> Callable:
        """``(a, b) -> bool`` deciding ``E`` in ``S``."""
        if self._oracle is not None:
            return self._oracle
        run = compile_formula(self._formula, S)
        kx, ky = (self.variables[0], self.arity), (self.variables[1], self.arity)

        def rel(a, b):
            value = run({kx: a, ky: b})
            if value is None:
                raise AbstractionError("E is unsettled within the budget")
            return value

        return rel


def _as_spec(spec) -> AbstractionSpec:
    if isinstance(spec, AbstractionSpec):
        return spec
    if spec is None:
        return AbstractionSpec("equality")
    return AbstractionSpec(spec)


def verify_equivalence(S, spec, budget: int | None = None) -> Verdict:
    """Reflexivity, symmetry and transitivity of ``E`` over ``concepts[m]``."""
    spec = _as_spec(spec)
    with Timer() as timer:
        family, complete = S.domain(spec.arity, budget)
        E = spec.relation(S)
        table = {(i, j): E(a, b) for i, a in enumerate(family) for j, b in enumerate(family)}
        n = len(family)
        verdict = None
        for i in range(n):
            if not table[i, i]:
                verdict = Verdict(FAILS, "equivalence", {"property": "reflexivity", "concepts": [family[i]]})
                break
        if verdict is None:
            for i in range(n):
                for j in range(n - 1, -1, -1):
                    if table[i, j] and not table[j, i]:
                        verdict = Verdict(FAILS, "equivalence", {"property": "symmetry", "concepts": [family[i], family[j]]})
                        break
                if verdict:
                    break
        if verdict is None:
            for i in range(n):
                for j in range(n):
                    if not table[i, j]:
                        continue
                    for k in range(n):
                        if table[j, k] and not table[i, k]:
                            verdict = Verdict(
                                FAILS, "equivalence",
                                {"property": "transitivity", "concepts": [family[i], family[j], family[k]]},
                            )
                            break
                    if verdict:
                        break
                if verdict:
                    break
        if verdict is None:
            verdict = Verdict(HOLDS if complete else UNKNOWN, "equivalence")
    verdict.bound = {"concepts": n, "complete": complete}
    verdict.elapsed = timer.elapsed
    verdict.detail = {"E": spec.describe()}
    if spec.semantic:
        verdict.flags = ("semantic E",)
    return verdict


def least_representatives(S, spec) -> dict:
    """``ℓ``: each concept mapped to the least member of its ``E``-class."""
    spec = _as_spec(spec)
    E = spec.relation(S)
    reps: list = []
    ell = {}
    for X in S.concepts.get(spec.arity, ()):  # canonical order
        for r in reps:
            if E(r, X):
                ell[X] = r
                break
        else:
            reps.append(X)
            ell[X] = X
    return ell


def _fresh_names(objects, count: int, tag: int) -> list:
    if all(isinstance(o, int) and not isinstance(o, bool) for o in objects):
        start = max(objects, default=-1) + 1
        return list(range(start, start + count))
    taken = set(objects)
    out, k = [], 0
    while len(out) < count:
        name = f"e{tag}_{k}"
        if name not in taken:
            out.append(name)
        k += 1
    return out


def build_abstraction(S: SOStructure, specs, reclose: bool = False, verify: bool = True) -> SOStructure:
    """Expand ``S`` by one extension operator per spec.

    In fresh mode every ``E``-class gets a new object appended to the domain
    (and to the order, if any); concept families are left as they are unless
    ``reclose`` asks for them to be replaced by full powersets over the new
    domain.  The result is checked against every principle when ``verify``.
    """
    specs = [_as_spec(s) for s in specs]
    if not specs:
        return S
    if S.lazy:
        raise AbstractionError("build_abstraction needs an exhaustive structure")
    objects = list(S.objects)
    ops = list(S.ext)
    for i, spec in enumerate(specs, start=len(ops) + 1):
        eq = verify_equivalence(S, spec)
        if not eq.holds:
            raise AbstractionError(f"spec {spec.name} is not an equivalence: {eq.witness}")
        ell = least_representatives(S, spec)
        reps = list(dict.fromkeys(ell.values()))
        if spec.mode == "fresh":
            names = _fresh_names(objects, len(reps), i)
            objects += names
            iota = dict(zip(reps, names))
        else:
            if spec.iota is None:
                raise AbstractionError("reuse mode needs an iota table")
            from .structures.model import as_relation

            iota = {as_relation(k, spec.arity): v for k, v in spec.iota.items()}
            missing = [r for r in reps if r not in iota]
            if missing:
                raise AbstractionError(f"iota is undefined on representative {sorted(missing[0])}")
            used = [iota[r] for r in reps]
            if len(set(used)) != len(used):
                raise AbstractionError("iota is not injective on representatives")
            for v in used:
                if v not in S.index:
                    raise AbstractionError(f"iota value {v!r} is not an object")
        ops.append(ExtOp(spec.arity, {X: iota[r] for X, r in ell.items()}))
    order = None
    if S.order is not None:
        order = list(S.order) + [o for o in objects if o not in S.index]
    concepts = dict(S.concepts)
    if reclose:
        from .structures.model import powerset_family

        for m in {s.arity for s in specs} | set(concepts):
            concepts[m] = powerset_family(objects, m)
    out = SOStructure(objects, concepts, ext=ops, order=order, constants=S.constants, name=S.name)
    if verify and not reclose:
        for i, spec in enumerate(specs, start=len(S.ext) + 1):
            v = verify_principle(out, i, spec)
            if not v.holds:
                raise AbstractionError(f"construction broke A[{spec.name}]: {v.witness}")
    return out


def verify_principle(S, i: int = 1, spec=None) -> Verdict:
    """``ext_i(X) = ext_i(Y) <-> E(X, Y)`` for all concept pairs (default ``E``: equality)."""
    spec = _as_spec(spec)
    label = f"AbstractionPrinciple({i})"
    with Timer() as timer:
        m = S.ext_arity(i)
        family, complete = S.domain(m)
        E = spec.relation(S)
        values, undefined = [], []
        for X in family:
            try:
                values.append((X, S.ext_value(i, X)))
            except ExtUndefinedError:
                undefined.append(X)
        verdict = None
        if undefined:
            verdict = Verdict(FAILS, label, {"undefined": undefined[0], "reason": f"ext{i} undefined"}, flags=("partiality",))
        else:
            for X, vx in values:
                for Y, vy in values:
                    same = vx == vy
                    if same != E(X, Y):
                        reason = "merges inequivalent concepts" if same else "splits an equivalence class"
                        verdict = Verdict(FAILS, label, {"pair": [X, Y], "values": [vx, vy], "reason": reason})
                        break
                if verdict:
                    break
        if verdict is None:
            verdict = Verdict(HOLDS if complete else UNKNOWN, label)
    verdict.bound = {"concepts": len(family), "complete": complete}
    verdict.elapsed = timer.elapsed
    verdict.detail = {"E": spec.describe()}
    if spec.semantic:
        verdict.flags = tuple(verdict.flags) + ("semantic E",)
    return verdict
