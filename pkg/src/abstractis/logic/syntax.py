"""Abstract syntax for many-sorted second-order formulas.

Object terms: ``ObjVar``, ``ObjConst``, ``Ext`` (an extension operator applied
to a concept term).  Concept terms: ``ConceptVar`` and ``App`` (``R[a]``, which
lowers the arity of ``R`` by the number of arguments).  Quantifiers carry the
sort of the bound variable as an arity, with 0 meaning "object".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..hf import HFSet, format_hf


class ArityError(ValueError):
    pass


# --- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class ObjVar:
    name: str


@dataclass(frozen=True)
class ObjConst:
    value: object


@dataclass(frozen=True)
class ConceptVar:
    name: str
    arity: int

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError(f"concept variable {self.name} needs arity >= 1")


@dataclass(frozen=True)
class App:
    concept: "ConceptTerm"
    args: tuple

    def __post_init__(self):
        if self.concept.arity - len(self.args) < 1:
            raise ArityError(
                f"application {format_concept(self)} leaves no argument places "
                f"(concept has arity {self.concept.arity})"
            )

    @property
    def arity(self) -> int:
        return self.concept.arity - len(self.args)


@dataclass(frozen=True)
class Ext:
    op: int  # 1-based operator index, printed ext<op>
    arg: "ConceptTerm"


ObjTerm = Union[ObjVar, ObjConst, Ext]
ConceptTerm = Union[ConceptVar, App]


# --- formulas ----------------------------------------------------------------


@dataclass(frozen=True)
class Eq:
    left: ObjTerm
    right: ObjTerm


@dataclass(frozen=True)
class Less:
    left: ObjTerm
    right: ObjTerm


@dataclass(frozen=True)
class ConceptEq:
    left: ConceptTerm
    right: ConceptTerm

    def __post_init__(self):
        if self.left.arity != self.right.arity:
            raise ArityError(
                f"{format_concept(self.left)} == {format_concept(self.right)} compares arities "
                f"{self.left.arity} and {self.right.arity}"
            )


@dataclass(frozen=True)
class Pred:
    concept: ConceptTerm
    args: tuple

    def __post_init__(self):
        if self.concept.arity != len(self.args):
            raise ArityError(
                f"{format_concept(self.concept)} has arity {self.concept.arity} "
                f"but is given {len(self.args)} argument(s)"
            )


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    arity: int
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    arity: int
    body: "Formula"


Formula = Union[Eq, Less, ConceptEq, Pred, Not, And, Or, Implies, Iff, Forall, Exists]
ATOMS = (Eq, Less, ConceptEq, Pred)
BINARY = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
QUANTIFIERS = {Forall: "forall", Exists: "exists"}


# --- printing ----------------------------------------------------------------


def format_const(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not object constants")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, HFSet):
        return format_hf(value)
    return "'" + str(value) + "'"


def format_term(t) -> str:
    if isinstance(t, ObjVar):
        return t.name
    if isinstance(t, ObjConst):
        return format_const(t.value)
    if isinstance(t, Ext):
        return f"ext{t.op}({format_concept(t.arg)})"
    raise TypeError(f"not an object term: {t!r}")


def format_concept(c) -> str:
    if isinstance(c, ConceptVar):
        return c.name
    if isinstance(c, App):
        return f"{format_concept(c.concept)}[{','.join(format_term(a) for a in c.args)}]"
    raise TypeError(f"not a concept term: {c!r}")


def _ends_in_quantifier(f) -> bool:
    while isinstance(f, Not):
        f = f.body
    return isinstance(f, (Forall, Exists))


def to_text(f) -> str:
    """Render in the concrete grammar; binary connectives are always parenthesised."""
    if isinstance(f, Eq):
        return f"{format_term(f.left)} = {format_term(f.right)}"
    if isinstance(f, Less):
        return f"{format_term(f.left)} < {format_term(f.right)}"
    if isinstance(f, ConceptEq):
        return f"{format_concept(f.left)} == {format_concept(f.right)}"
    if isinstance(f, Pred):
        return f"{format_concept(f.concept)}({','.join(format_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return "not " + to_text(f.body)
    op = BINARY.get(type(f))
    if op is not None:
        left = to_text(f.left)
        if _ends_in_quantifier(f.left):
            left = "(" + left + ")"
        return f"({left} {op} {to_text(f.right)})"
    q = QUANTIFIERS.get(type(f))
    if q is not None:
        binder = f.var if f.arity == 0 else f"{f.var}:{f.arity}"
        return f"{q} {binder}. {to_text(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# --- structural queries --------------------------------------------------------


def size(f) -> int:
    """Number of connective and quantifier nodes."""
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return 1 + size(f.body)
    if isinstance(f, (Forall, Exists)):
        return 1 + size(f.body)
    return 1 + size(f.left) + size(f.right)


def _term_vars(t, objs: set, concepts: set):
    if isinstance(t, ObjVar):
        objs.add(t.name)
    elif isinstance(t, Ext):
        _concept_vars(t.arg, objs, concepts)


def _concept_vars(c, objs: set, concepts: set):
    if isinstance(c, ConceptVar):
        concepts.add((c.name, c.arity))
    else:
        _concept_vars(c.concept, objs, concepts)
        for a in c.args:
            _term_vars(a, objs, concepts)


def free_variables(f) -> tuple[frozenset, frozenset]:
    """(free object variable names, free concept variables as (name, arity))."""
    if isinstance(f, (Eq, Less)):
        objs, cons = set(), set()
        _term_vars(f.left, objs, cons)
        _term_vars(f.right, objs, cons)
        return frozenset(objs), frozenset(cons)
    if isinstance(f, ConceptEq):
        objs, cons = set(), set()
        _concept_vars(f.left, objs, cons)
        _concept_vars(f.right, objs, cons)
        return frozenset(objs), frozenset(cons)
    if isinstance(f, Pred):
        objs, cons = set(), set()
        _concept_vars(f.concept, objs, cons)
        for a in f.args:
            _term_vars(a, objs, cons)
        return frozenset(objs), frozenset(cons)
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (Forall, Exists)):
        objs, cons = free_variables(f.body)
        if f.arity == 0:
            return objs - {f.var}, cons
        return objs, cons - {(f.var, f.arity)}
    lo, lc = free_variables(f.left)
    ro, rc = free_variables(f.right)
    return lo | ro, lc | rc


def _concept_has_ext(c) -> bool:
    if isinstance(c, ConceptVar):
        return False
    return _concept_has_ext(c.concept) or any(isinstance(a, Ext) for a in c.args)


def mentions_ext(f) -> bool:
    if isinstance(f, (Eq, Less)):
        return isinstance(f.left, Ext) or isinstance(f.right, Ext)
    if isinstance(f, ConceptEq):
        return _concept_has_ext(f.left) or _concept_has_ext(f.right)
    if isinstance(f, Pred):
        return _concept_has_ext(f.concept) or any(isinstance(a, Ext) for a in f.args)
    if isinstance(f, (Not, Forall, Exists)):
        return mentions_ext(f.body)
    return mentions_ext(f.left) or mentions_ext(f.right)


def mentions_order(f) -> bool:
    if isinstance(f, Less):
        return True
    if isinstance(f, ATOMS):
        return False
    if isinstance(f, Not):
        return mentions_order(f.body)
    if isinstance(f, (Forall, Exists)):
        return mentions_order(f.body)
    return mentions_order(f.left) or mentions_order(f.right)


def alpha_key(f):
    """A hashable key equal for formulas that differ only in bound names."""
    return _akey(f, {}, 0)


def _akey_term(t, env):
    if isinstance(t, ObjVar):
        return env.get((t.name, 0), ("v", t.name))
    if isinstance(t, ObjConst):
        return ("c", type(t.value).__name__, format_const(t.value))
    return ("e", t.op, _akey_concept(t.arg, env))


def _akey_concept(c, env):
    if isinstance(c, ConceptVar):
        return env.get((c.name, c.arity), ("V", c.name, c.arity))
    return ("A", _akey_concept(c.concept, env), tuple(_akey_term(a, env) for a in c.args))


def _akey(f, env, depth):
    if isinstance(f, Eq):
        return ("=", _akey_term(f.left, env), _akey_term(f.right, env))
    if isinstance(f, Less):
        return ("<", _akey_term(f.left, env), _akey_term(f.right, env))
    if isinstance(f, ConceptEq):
        return ("==", _akey_concept(f.left, env), _akey_concept(f.right, env))
    if isinstance(f, Pred):
        return ("P", _akey_concept(f.concept, env), tuple(_akey_term(a, env) for a in f.args))
    if isinstance(f, Not):
        return ("not", _akey(f.body, env, depth))
    if isinstance(f, (Forall, Exists)):
        inner = dict(env)
        inner[(f.var, f.arity)] = ("#", depth)
        return (QUANTIFIERS[type(f)], f.arity, _akey(f.body, inner, depth + 1))
    return (BINARY[type(f)], _akey(f.left, env, depth), _akey(f.right, env, depth))


def _bound_names(f, out: set):
    if isinstance(f, ATOMS):
        return out
    if isinstance(f, (Forall, Exists)):
        out.add(f.var)
        return _bound_names(f.body, out)
    if isinstance(f, Not):
        return _bound_names(f.body, out)
    _bound_names(f.left, out)
    return _bound_names(f.right, out)


def _subst_term(t, var, term):
    if isinstance(t, ObjVar):
        return term if t.name == var else t
    if isinstance(t, Ext):
        return Ext(t.op, _subst_concept(t.arg, var, term))
    return t


def _subst_concept(c, var, term):
    if isinstance(c, ConceptVar):
        return c
    return App(_subst_concept(c.concept, var, term), tuple(_subst_term(a, var, term) for a in c.args))


def substitute(f, var: str, term):
    """Replace free occurrences of object variable ``var`` by ``term``.

    Bound variables that would capture ``term`` are renamed.
    """
    blocked = set()
    _term_vars(term, blocked, set())
    return _subst(f, var, term, blocked)


def _fresh(name: str, avoid: set) -> str:
    k = 1
    while f"{name}{k}" in avoid:
        k += 1
    return f"{name}{k}"


def _subst(f, var, term, blocked):
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, var, term), _subst_term(f.right, var, term))
    if isinstance(f, Less):
        return Less(_subst_term(f.left, var, term), _subst_term(f.right, var, term))
    if isinstance(f, ConceptEq):
        return ConceptEq(_subst_concept(f.left, var, term), _subst_concept(f.right, var, term))
    if isinstance(f, Pred):
        return Pred(_subst_concept(f.concept, var, term), tuple(_subst_term(a, var, term) for a in f.args))
    if isinstance(f, Not):
        return Not(_subst(f.body, var, term, blocked))
    if isinstance(f, (Forall, Exists)):
        cls = type(f)
        if f.arity == 0 and f.var == var:
            return f
        if f.arity == 0 and f.var in blocked and var in free_variables(f.body)[0]:
            avoid = blocked | _bound_names(f.body, set()) | set(free_variables(f.body)[0]) | {var}
            new = _fresh(f.var, avoid)
            body = _subst(f.body, f.var, ObjVar(new), set())
            return cls(new, 0, _subst(body, var, term, blocked))
        return cls(f.var, f.arity, _subst(f.body, var, term, blocked))
    return type(f)(_subst(f.left, var, term, blocked), _subst(f.right, var, term, blocked))
