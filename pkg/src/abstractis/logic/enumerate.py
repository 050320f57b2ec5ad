"""Bounded, duplicate-free enumeration of formulas over a finite signature."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .syntax import (
    And,
    App,
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
    alpha_key,
)

DEFAULT_DEPTH_CAP = 6

_BINARY = {"and": And, "or": Or, "implies": Implies, "iff": Iff}
_QUANT = {"forall": Forall, "exists": Exists}


class DepthCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """What the enumerator may use.

    ``object_vars`` and ``concept_vars`` form the variable pool: they occur
    free and may be bound by quantifiers.  ``concept_consts`` are
    ``(name, arity)`` pairs never bound.  ``ext_arities[i]`` is the concept
    arity of operator ``ext<i+1>``.  Application terms ``R[a]`` are only
    generated when ``applications`` is set.
    """

    object_vars: tuple = ("x",)
    concept_vars: tuple = ()
    object_consts: tuple = ()
    concept_consts: tuple = ()
    ext_arities: tuple = ()
    order: bool = False
    connectives: tuple = ("not", "and", "or", "implies", "iff")
    quantifiers: tuple = ("forall", "exists")
    quantify_concepts: bool = True
    applications: bool = False
    concept_equality: bool = True

    def __post_init__(self):
        unknown = set(self.connectives) - {"not", *_BINARY}
        if unknown:
            raise ValueError(f"unknown connectives {sorted(unknown)}")
        unknown = set(self.quantifiers) - set(_QUANT)
        if unknown:
            raise ValueError(f"unknown quantifiers {sorted(unknown)}")


def _base_concepts(sig: Signature) -> list:
    out = [ConceptVar(n, a) for n, a in sig.concept_consts]
    out += [ConceptVar(n, a) for n, a in sig.concept_vars]
    return out


def _object_terms(sig: Signature, base_concepts: list) -> list:
    simple = [ObjVar(v) for v in sig.object_vars] + [ObjConst(c) for c in sig.object_consts]
    terms = list(simple)
    for i, arity in enumerate(sig.ext_arities, start=1):
        for c in _concept_terms(sig, base_concepts, simple):
            if c.arity == arity:
                terms.append(Ext(i, c))
    return terms


def _concept_terms(sig: Signature, base: list, args_from: list) -> list:
    out = list(base)
    if sig.applications:
        for c in base:
            for k in range(1, c.arity):
                for args in itertools.product(args_from, repeat=k):
                    out.append(App(c, args))
    return out


def atoms(sig: Signature) -> list:
    base = _base_concepts(sig)
    if not sig.object_vars and not sig.object_consts and not base:
        return []
    terms = _object_terms(sig, base)
    concepts = _concept_terms(sig, base, terms)
    out = [Eq(a, b) for a, b in itertools.product(terms, repeat=2)]
    if sig.order:
        out += [Less(a, b) for a, b in itertools.product(terms, repeat=2)]
    for c in concepts:
        out += [Pred(c, args) for args in itertools.product(terms, repeat=c.arity)]
    if sig.concept_equality:
        out += [ConceptEq(a, b) for a, b in itertools.product(concepts, repeat=2) if a.arity == b.arity]
    return out


def _binders(sig: Signature) -> list:
    out = [(v, 0) for v in sig.object_vars]
    if sig.quantify_concepts:
        out += list(sig.concept_vars)
    return out


def formulas_by_size(sig: Signature, depth: int, cap: int = DEFAULT_DEPTH_CAP) -> list[list]:
    """``levels[s]`` lists the formulas with exactly ``s`` connective/quantifier nodes."""
    if depth > cap:
        raise DepthCapExceeded(f"depth {depth} exceeds the cap {cap}")
    levels = [atoms(sig)]
    binary = [_BINARY[c] for c in sig.connectives if c in _BINARY]
    quants = [_QUANT[q] for q in sig.quantifiers]
    binders = _binders(sig)
    for s in range(1, depth + 1):
        level = []
        if "not" in sig.connectives:
            level += [Not(f) for f in levels[s - 1]]
        for cls in binary:
            for a in range(s):
                for left in levels[a]:
                    for right in levels[s - 1 - a]:
                        level.append(cls(left, right))
        seen = set()
        for cls in quants:
            for var, arity in binders:
                for body in levels[s - 1]:
                    g = cls(var, arity, body)
                    key = alpha_key(g)
                    if key not in seen:
                        seen.add(key)
                        level.append(g)
        levels.append(level)
    return levels


def enumerate_formulas(sig: Signature, depth: int, cap: int = DEFAULT_DEPTH_CAP):
    """Yield every formula with at most ``depth`` nodes, smallest first."""
    for level in formulas_by_size(sig, depth, cap):
        yield from level
