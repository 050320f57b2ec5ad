"""Checking comprehension, choice, global choice and extension axioms on a structure."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..logic.enumerate import Signature
from ..logic.syntax import (
    And,
    ConceptVar,
    Exists,
    Forall,
    Iff,
    Implies,
    Less,
    Not,
    ObjConst,
    ObjVar,
    Pred,
    format_const,
    free_variables,
    substitute,
    to_text,
)
from .definable import BudgetExceeded, ReducedEnumeration, closure_signature, definable_relations
from .evaluate import truth
from .model import FAILS, HOLDS, UNKNOWN, ExtUndefinedError, StructureError, Timer, Verdict

KINDS = {
    "fullcomp": "FullComp",
    "focomp": "FOComp",
    "delta11comp": "Delta11Comp",
    "sigma11choice": "Sigma11Choice",
    "gc": "GCWellOrder",
    "gcwellorder": "GCWellOrder",
    "blv": "BLV",
    "abstraction": "AbstractionPrinciple",
    "abstractionprinciple": "AbstractionPrinciple",
    "collection": "Collection",
    "setaxiom": "SetAxiom",
}


@dataclass(frozen=True)
class SchemaKind:
    name: str
    params: dict = field(default_factory=dict, hash=False, compare=False)

    @classmethod
    def parse(cls, text: str) -> "SchemaKind":
        """``blv``, ``focomp``, ``abstraction:2``, ``setaxiom:pairing`` ..."""
        head, _, arg = text.partition(":")
        name = KINDS.get(head.strip().lower().replace("-", "").replace("_", ""))
        if name is None:
            raise ValueError(f"unknown schema {text!r}; expected one of {sorted(set(KINDS))}")
        params = {}
        if arg:
            if name == "AbstractionPrinciple":
                params["op"] = int(arg)
            elif name == "SetAxiom":
                params["axiom"] = arg
            elif name in ("FOComp", "FullComp", "Delta11Comp"):
                params["params"] = arg
            else:
                raise ValueError(f"schema {name} takes no argument")
        return cls(name, params)

    def label(self) -> str:
        extra = self.params.get("op") or self.params.get("axiom")
        return f"{self.name}({extra})" if extra else self.name


# --- witnesses ----------------------------------------------------------------------


def _vars(n: int) -> list[str]:
    return ["x"] if n == 1 else [f"x{i}" for i in range(1, n + 1)]


def relation_formula(S, rel, n: int):
    """A formula with the objects of ``rel`` as constants defining exactly ``rel``."""
    vs = [ObjVar(v) for v in _vars(n)]
    disjuncts = []
    for t in sorted(rel, key=lambda t: tuple(S.index[a] for a in t)):
        conj = None
        for v, a in zip(vs, t):
            atom = _eq(v, ObjConst(a))
            conj = atom if conj is None else And(conj, atom)
        disjuncts.append(conj)
    if not disjuncts:
        return Not(_eq(vs[0], vs[0]))
    out = disjuncts[0]
    from ..logic.syntax import Or

    for d in disjuncts[1:]:
        out = Or(out, d)
    return out


def _eq(a, b):
    from ..logic.syntax import Eq

    return Eq(a, b)


def comprehension_instance(phi, n: int, var: str = "C"):
    """``exists C:n. forall x1..xn. (C(x1..xn) <-> phi)``."""
    vs = _vars(n)
    body = Iff(Pred(ConceptVar(var, n), tuple(ObjVar(v) for v in vs)), phi)
    for v in reversed(vs):
        body = Forall(v, 0, body)
    return Exists(var, n, body)


def _missing_witness(S, rel, n):
    phi = relation_formula(S, rel, n)
    vs = ",".join(_vars(n))
    return {
        "arity": n,
        "relation": rel,
        "formula": f"{{{vs} : {to_text(phi)}}}",
        "replay": to_text(Not(comprehension_instance(phi, n))),
    }


# --- comprehension ------------------------------------------------------------------------


def _arities(S, policy) -> list[int]:
    if "arities" in policy:
        return list(policy["arities"])
    found = sorted(a for a in S.concepts if a >= 1)
    return found or [1]


def _check_comprehension(S, kind: SchemaKind, policy) -> Verdict:
    params = policy.get("params", kind.params.get("params", "all"))
    second_order = kind.name != "FOComp"
    budget = policy.get("cell_budget", 2_000_000)
    flags = []
    if kind.name == "Delta11Comp":
        flags.append("finite: delta11 coincides with second-order definability")
    exact = True
    examined = 0
    for n in _arities(S, policy):
        try:
            fam = definable_relations(S, n, params=params, second_order=second_order, budget=budget)
            rels = fam.relations(limit=policy.get("relation_limit", 1 << 18))
        except BudgetExceeded as exc:
            return Verdict(UNKNOWN, kind.label(), None, {"reason": str(exc)}, flags=tuple(flags))
        exact = exact and fam.exact
        examined += len(rels)
        missing = [r for r in rels if not S.has_concept(r, n)]
        if missing:
            rel = min(missing, key=S.concept_code)
            return Verdict(
                FAILS,
                kind.label(),
                _missing_witness(S, rel, n),
                {"relations": examined, "params": params, "exact": fam.exact},
                flags=tuple(flags),
            )
    status = HOLDS if exact else UNKNOWN
    if not exact:
        flags.append("bounded variable width")
    return Verdict(status, kind.label(), None, {"relations": examined, "params": params, "exact": exact}, flags=tuple(flags))


def _lazy_comprehension(S, kind: SchemaKind, policy) -> Verdict:
    depth = policy.get("depth")
    if not depth and depth != 0:
        depth = None
    if depth is None:
        return Verdict(UNKNOWN, kind.label(), None, {"depth": 0, "reason": "no formula depth budget"})
    sig = Signature(object_vars=("x",), concept_vars=(("X", 1),), connectives=("not", "and"), quantifiers=("exists",),
                    ext_arities=tuple(S.ext_arities().values()), quantify_concepts=kind.name != "FOComp")
    from ..logic.enumerate import enumerate_formulas

    checked = 0
    for phi in enumerate_formulas(sig, depth):
        objs, cons = free_variables(phi)
        if objs - {"x"} or cons:
            continue
        checked += 1
        value = truth(S, comprehension_instance(phi, 1))
        if value is False:
            witness = {"formula": to_text(phi), "replay": to_text(Not(comprehension_instance(phi, 1)))}
            return Verdict(FAILS, kind.label(), witness, {"depth": depth, "instances": checked, "budget": S.budget})
    return Verdict(UNKNOWN, kind.label(), None, {"depth": depth, "instances": checked, "budget": S.budget})


# --- choice ----------------------------------------------------------------------------------


def _check_choice(S, kind: SchemaKind, policy) -> Verdict:
    params = policy.get("params", "all")
    limit = policy.get("choice_limit", 1 << 20)
    objs = list(S.objects)
    checked = 0
    for m in sorted(a for a in S.concepts if a >= 1):
        family = list(S.concepts[m])
        if not objs or not family:
            continue
        cindex = {c: i for i, c in enumerate(family)}
        realizable = set()
        for R in S.concepts.get(1 + m, ()):
            f = []
            for x in objs:
                sect = frozenset(t[1:] for t in R if t[0] == x)
                if sect not in cindex:
                    break
                f.append(cindex[sect])
            else:
                realizable.add(tuple(f))
        try:
            fam = definable_relations(S, sorts=(0, m), params=params)
        except BudgetExceeded as exc:
            return Verdict(UNKNOWN, kind.label(), None, {"reason": str(exc)})
        block_of = {t: b for b, blk in enumerate(fam.blocks) for t in blk}
        masks = set()
        for f in realizable:
            mask = 0
            for x, ci in zip(objs, f):
                mask |= 1 << block_of[(x, family[ci])]
            masks.add(mask)
        b = len(fam.blocks)
        covers = []
        for blk in fam.blocks:
            covers.append(frozenset(x for x, _ in blk))

        def witness(mask):
            phi = frozenset().union(*(fam.blocks[i] for i in range(b) if mask >> i & 1))
            pairs = sorted(phi, key=lambda t: (S.index[t[0]], S.concept_code(t[1])))
            out = {"arity": m, "relation": pairs, "reason": f"no R in concepts[{1 + m}] with Phi(x, R[x]) for all x"}
            out.update(_choice_replay(pairs, m))
            return out

        if b <= 20:
            for mask in range(1 << b):
                covered = set()
                for i in range(b):
                    if mask >> i & 1:
                        covered |= covers[i]
                if len(covered) < len(objs):
                    continue
                checked += 1
                if not any(t & mask == t for t in masks):
                    return Verdict(FAILS, kind.label(), witness(mask), {"instances": checked, "params": params, "exact": fam.exact})
        elif all(len(blk) == 1 for blk in fam.blocks):
            total = len(family) ** len(objs)
            if total > limit:
                return Verdict(UNKNOWN, kind.label(), None, {"reason": f"{total} choice functions exceed {limit}"})
            for f in itertools.product(range(len(family)), repeat=len(objs)):
                checked += 1
                if f not in realizable:
                    mask = 0
                    for x, ci in zip(objs, f):
                        mask |= 1 << block_of[(x, family[ci])]
                    return Verdict(FAILS, kind.label(), witness(mask), {"instances": checked, "params": params, "exact": True})
        else:
            return Verdict(UNKNOWN, kind.label(), None, {"reason": f"{b} blocks exceed the search limit"})
        if not fam.exact:
            return Verdict(UNKNOWN, kind.label(), None, {"instances": checked, "exact": False})
    return Verdict(HOLDS, kind.label(), None, {"instances": checked, "params": params, "exact": True})


def _choice_replay(pairs, m: int) -> dict:
    # Phi(x, C) is the disjunction of x = a & C == P_i over its pairs
    names = {}
    for _, c in pairs:
        names.setdefault(c, f"P{len(names)}")
    clauses = " | ".join(f"(x = {format_const(a)} & R[x] == {names[c]})" for a, c in pairs)
    replay = f"not exists R:{1 + m}. forall x. ({clauses})"
    return {"replay": replay, "assignment": {n: c for c, n in names.items()}}


# --- global choice ----------------------------------------------------------------------------


def least_witness_instance(phi, var: str = "x"):
    """``(exists x. phi) -> exists x. (phi & forall y. (y < x -> not phi[y/x]))``."""
    avoid = set(free_variables(phi)[0]) | {var}
    y = "y"
    k = 0
    while y in avoid:
        k += 1
        y = f"y{k}"
    below = Forall(y, 0, Implies(Less(ObjVar(y), ObjVar(var)), Not(substitute(phi, var, ObjVar(y)))))
    return Implies(Exists(var, 0, phi), Exists(var, 0, And(phi, below)))


def _check_gc(S, kind: SchemaKind, policy) -> Verdict:
    if S.order is None:
        return Verdict(FAILS, kind.label(), {"reason": "structure has no global order"}, {"instances": 0})
    depth = policy.get("depth", 2)
    if S.lazy:
        sig = Signature(object_vars=("x",), connectives=("not", "and"), quantifiers=("exists",), order=True)
        from ..logic.enumerate import enumerate_formulas

        formulas = [f for f in enumerate_formulas(sig, depth) if free_variables(f)[0] <= {"x"}]
    else:
        enum = ReducedEnumeration(S, closure_signature(S))
        formulas = [f for f, _, free in enum.up_to(depth) if free <= {"x"}]
    unsettled = 0
    for i, phi in enumerate(formulas):
        try:
            value = truth(S, least_witness_instance(phi))
        except ExtUndefinedError as exc:
            return Verdict(FAILS, kind.label(), {"formula": to_text(phi), "reason": str(exc)}, {"instances": i + 1}, flags=("partiality",))
        if value is False:
            witness = {"formula": to_text(phi), "replay": to_text(Not(least_witness_instance(phi)))}
            return Verdict(FAILS, kind.label(), witness, {"instances": i + 1})
        if value is None:
            unsettled += 1
    status = UNKNOWN if unsettled or S.lazy else HOLDS
    return Verdict(status, kind.label(), None, {"instances": len(formulas), "depth": depth, "unsettled": unsettled})


# --- Basic Law V --------------------------------------------------------------------------------


def injection_search(family: list, objects: list, limit: int = 1 << 22) -> dict:
    """Exhaustively look for a total injective map ``family -> objects``."""
    total = len(objects) ** len(family)
    if total > limit:
        raise BudgetExceeded(f"{total} maps exceed the search limit {limit}")
    tried = 0
    for values in itertools.product(range(len(objects)), repeat=len(family)):
        tried += 1
        if len(set(values)) == len(values):
            return {"found": dict(zip(family, (objects[v] for v in values))), "maps": tried, "injective": 1}
    return {"found": None, "maps": tried, "injective": 0}


def _check_blv(S, kind: SchemaKind, policy) -> Verdict:
    op = policy.get("op", 1)
    m = policy.get("arity", S.ext_arity(op) if len(S.ext_arities()) >= op else 1)
    family, complete = S.domain(m)
    if len(S.ext_arities()) < op:
        if S.lazy:
            raise StructureError("BLV needs an extension operator on lazy structures")
        objects = list(S.objects)
        try:
            res = injection_search(family, objects, policy.get("map_limit", 1 << 22))
        except BudgetExceeded as exc:
            return Verdict(UNKNOWN, kind.label(), None, {"reason": str(exc)})
        bound = {"maps": res["maps"], "injective": res["injective"]}
        if res["found"] is None:
            witness = {"pigeonhole": {"concepts": len(family), "objects": len(objects)},
                       "reason": f"no injection from {len(family)} concepts into {len(objects)} objects"}
            return Verdict(FAILS, kind.label(), witness, bound)
        return Verdict(HOLDS, kind.label(), {"extension": res["found"]}, bound, flags=("expansion exists",))
    flags = []
    pairs = 0
    seen: dict = {}
    undefined = []
    for X in family:
        try:
            v = S.ext_value(op, X)
        except ExtUndefinedError:
            undefined.append(X)
            continue
        pairs += 1
        if v in seen:
            Y = seen[v]
            formula = f"ext{op}(X) = ext{op}(Y) & not X == Y"
            witness = {"pair": [Y, X], "value": v, "formula": formula, "replay": formula, "assignment": {"X": Y, "Y": X}}
            if S.lazy and hasattr(Y, "kind"):
                witness["kinds"] = [Y.kind, X.kind]
            return Verdict(FAILS, kind.label(), witness, {"concepts": pairs, "complete": complete})
        seen[v] = X
    if undefined:
        flags.append("partiality")
        if not policy.get("on_domain", True):
            return Verdict(FAILS, kind.label(), {"undefined": undefined[0]}, {"concepts": pairs}, flags=tuple(flags))
    status = HOLDS if complete else UNKNOWN
    return Verdict(status, kind.label(), None, {"concepts": pairs, "complete": complete, "undefined": len(undefined)}, flags=tuple(flags))


# --- front door -------------------------------------------------------------------------------------


def check_schema(S, kind, **policy) -> Verdict:
    """Check one schema on ``S`` and return a timed ``Verdict``.

    ``kind`` is a ``SchemaKind`` or its textual name.  Recognised policy keys:
    ``params`` (``"all"``, ``"none"`` or objects), ``arities``, ``depth``,
    ``op``, ``arity``, ``on_domain``, ``spec`` (abstraction), ``axiom``,
    ``level`` and ``rank_bound`` (set axioms).
    """
    if isinstance(kind, str):
        kind = SchemaKind.parse(kind)
    policy = {**kind.params, **policy}
    with Timer() as timer:
        if kind.name in ("FullComp", "FOComp", "Delta11Comp"):
            verdict = _lazy_comprehension(S, kind, policy) if S.lazy else _check_comprehension(S, kind, policy)
        elif kind.name == "Sigma11Choice":
            if S.lazy:
                verdict = Verdict(UNKNOWN, kind.label(), None, {"reason": "choice is only decided on exhaustive structures"})
            else:
                verdict = _check_choice(S, kind, policy)
        elif kind.name == "GCWellOrder":
            verdict = _check_gc(S, kind, policy)
        elif kind.name == "BLV":
            verdict = _check_blv(S, kind, policy)
        elif kind.name == "AbstractionPrinciple":
            from ..abstraction import verify_principle

            verdict = verify_principle(S, policy.get("op", 1), policy.get("spec"))
        elif kind.name in ("Collection", "SetAxiom"):
            from ..extraction import check_set_axioms, collapse_inner_model

            axiom = "collection" if kind.name == "Collection" else policy.get("axiom")
            if not axiom:
                raise ValueError("SetAxiom needs an axiom name")
            im = collapse_inner_model(S, policy.get("level", "meta"))
            report = check_set_axioms(im, [axiom], rank_bound=policy.get("rank_bound"), depth=policy.get("depth", 2))
            verdict = report[axiom]
        else:
            raise ValueError(f"unsupported schema {kind.name}")
    verdict.schema = verdict.schema or kind.label()
    verdict.elapsed = timer.elapsed
    # structure-level decisions (such as how Small is decided) travel with every verdict
    extra = [f for f in getattr(S, "flags", ()) if f not in verdict.flags]
    if extra:
        verdict.flags = tuple(verdict.flags) + tuple(extra)
    return verdict
