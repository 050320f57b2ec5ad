"""Slow, direct reference implementations used to cross-check the library."""

from __future__ import annotations

import itertools

from abstractis.hf import HFSet
from abstractis.logic.syntax import (
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
)


class Undefined(Exception):
    pass


def term(S, t, env):
    if isinstance(t, ObjVar):
        return env[t.name]
    if isinstance(t, ObjConst):
        return t.value
    if isinstance(t, Ext):
        c = concept(S, t.arg, env)
        table = S.ext[t.op - 1].table
        if c not in table:
            raise Undefined(t.op)
        return table[c]
    raise TypeError(t)


def concept(S, c, env):
    if isinstance(c, ConceptVar):
        if (c.name, c.arity) in env:
            return env[(c.name, c.arity)]
        return S.constants[c.name][1]
    if isinstance(c, App):
        rel = concept(S, c.concept, env)
        args = tuple(term(S, a, env) for a in c.args)
        k = len(args)
        return frozenset(t[k:] for t in rel if t[:k] == args)
    raise TypeError(c)


def holds(S, f, env) -> bool:
    """Textbook recursive satisfaction with left-to-right short circuits."""
    if isinstance(f, Eq):
        return term(S, f.left, env) == term(S, f.right, env)
    if isinstance(f, Less):
        order = list(S.order)
        return order.index(term(S, f.left, env)) < order.index(term(S, f.right, env))
    if isinstance(f, ConceptEq):
        return concept(S, f.left, env) == concept(S, f.right, env)
    if isinstance(f, Pred):
        return tuple(term(S, a, env) for a in f.args) in concept(S, f.concept, env)
    if isinstance(f, Not):
        return not holds(S, f.body, env)
    if isinstance(f, And):
        return holds(S, f.left, env) and holds(S, f.right, env)
    if isinstance(f, Or):
        return holds(S, f.left, env) or holds(S, f.right, env)
    if isinstance(f, Implies):
        return (not holds(S, f.left, env)) or holds(S, f.right, env)
    if isinstance(f, Iff):
        a = holds(S, f.left, env)
        return a == holds(S, f.right, env)
    if isinstance(f, (Forall, Exists)):
        key = f.var if f.arity == 0 else (f.var, f.arity)
        values = S.objects if f.arity == 0 else S.concepts.get(f.arity, ())
        want = isinstance(f, Exists)
        for v in values:
            if holds(S, f.body, {**env, key: v}) == want:
                return want
        return not want
    raise TypeError(f)


def outcome(fn):
    try:
        return fn()
    except Undefined:
        return "undefined"


def powerset(items):
    items = list(items)
    return [frozenset(c) for r in range(len(items) + 1) for c in itertools.combinations(items, r)]


def automorphisms(S):
    """Permutations of the objects preserving concepts families, operators, order and constants."""
    objs = list(S.objects)
    out = []
    for perm in itertools.permutations(objs):
        m = dict(zip(objs, perm))

        def image(rel):
            return frozenset(tuple(m[a] for a in t) for t in rel)

        ok = all(set(map(image, fam)) == set(fam) for fam in S.concepts.values())
        ok = ok and all(image(rel) == rel for _, rel in S.constants.values())
        ok = ok and all(all(m[v] == op.table.get(image(c)) for c, v in op.table.items()) for op in S.ext)
        ok = ok and (S.order is None or all(m[a] == a for a in objs))
        if ok:
            out.append(m)
    return out


def invariant_subsets(S, fixed=()):
    """Subsets of M closed under every automorphism fixing ``fixed``."""
    autos = [m for m in automorphisms(S) if all(m[a] == a for a in fixed)]
    return [A for A in powerset(S.objects) if all(frozenset(m[a] for a in A) == A for m in autos)]


def collapse(nodes, edges):
    """pi(y) = {pi(z) : z below y}, by plain recursion."""
    below = {n: [a for a, b in edges if b == n] for n in nodes}
    memo = {}

    def pi(y):
        if y not in memo:
            memo[y] = HFSet(pi(z) for z in below[y])
        return memo[y]

    return {n: pi(n) for n in nodes}


def least_witness(R, key=lambda y: y):
    best = {}
    for x, y in R:
        if x not in best or key(y) < key(best[x]):
            best[x] = y
    return frozenset(best.items())
