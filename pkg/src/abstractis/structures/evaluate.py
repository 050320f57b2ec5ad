"""Satisfaction for second-order formulas.

Formulas are compiled once into closures over an environment dict.  Object
variables are keyed by name, concept variables by ``(name, arity)``.  Truth
values are three-valued: ``None`` stands for "not settled within the budget"
and only arises on lazy structures.
"""

from __future__ import annotations

from ..logic.syntax import (
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
    free_variables,
    to_text,
)
from .model import FAILS, HOLDS, UNKNOWN, StructureError, Verdict, as_relation


class EvaluationError(ValueError):
    pass


def _compile_term(t, S):
    if isinstance(t, ObjVar):
        name = t.name

        def var(env):
            try:
                return env[name]
            except KeyError:
                raise EvaluationError(f"unassigned object variable {name}") from None

        return var
    if isinstance(t, ObjConst):
        value = t.value
        if not S.lazy and value not in S.index:
            raise EvaluationError(f"constant {value!r} is not an object of the structure")
        return lambda env: value
    if isinstance(t, Ext):
        op = t.op
        if op > len(S.ext_arities()):
            raise EvaluationError(f"structure has no operator ext{op}")
        if S.ext_arity(op) != t.arg.arity:
            raise EvaluationError(f"ext{op} takes arity {S.ext_arity(op)}, got {t.arg.arity}")
        arg = _compile_concept(t.arg, S)
        ext_value = S.ext_value
        return lambda env: ext_value(op, arg(env))
    raise TypeError(f"not an object term: {t!r}")


def _compile_concept(c, S):
    if isinstance(c, ConceptVar):
        key = (c.name, c.arity)
        const = S.constants.get(c.name)
        if const is not None and const[0] != c.arity:
            const = None

        def cvar(env):
            v = env.get(key)
            if v is not None:
                return v
            if const is not None:
                return const[1]
            raise EvaluationError(f"unassigned concept variable {c.name}:{c.arity}")

        return cvar
    if isinstance(c, App):
        inner = _compile_concept(c.concept, S)
        args = [_compile_term(a, S) for a in c.args]
        k = len(args)
        arity = c.arity
        make = S.make_concept

        def app(env):
            rel = inner(env)
            prefix = tuple(a(env) for a in args)
            return make(frozenset(t[k:] for t in rel if t[:k] == prefix), arity)

        return app
    raise TypeError(f"not a concept term: {c!r}")


def _and3(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _not3(a):
    return None if a is None else not a


def compile_formula(f, S):
    """Return ``env -> True | False | None``."""
    if isinstance(f, Eq):
        left, right = _compile_term(f.left, S), _compile_term(f.right, S)
        return lambda env: left(env) == right(env)
    if isinstance(f, Less):
        if S.order is None:
            raise EvaluationError("the order symbol needs a structure with an order")
        left, right = _compile_term(f.left, S), _compile_term(f.right, S)
        less = S.less
        return lambda env: less(left(env), right(env))
    if isinstance(f, ConceptEq):
        left, right = _compile_concept(f.left, S), _compile_concept(f.right, S)
        return lambda env: left(env) == right(env)
    if isinstance(f, Pred):
        concept = _compile_concept(f.concept, S)
        args = [_compile_term(a, S) for a in f.args]
        if len(args) == 1:
            (a0,) = args
            return lambda env: (a0(env),) in concept(env)
        return lambda env: tuple(a(env) for a in args) in concept(env)
    if isinstance(f, Not):
        body = compile_formula(f.body, S)
        return lambda env: _not3(body(env))
    if isinstance(f, And):
        left, right = compile_formula(f.left, S), compile_formula(f.right, S)

        def conj(env):
            a = left(env)
            if a is False:
                return False
            return _and3(a, right(env))

        return conj
    if isinstance(f, Or):
        left, right = compile_formula(f.left, S), compile_formula(f.right, S)

        def disj(env):
            a = left(env)
            if a is True:
                return True
            return _not3(_and3(_not3(a), _not3(right(env))))

        return disj
    if isinstance(f, Implies):
        left, right = compile_formula(f.left, S), compile_formula(f.right, S)

        def imp(env):
            a = left(env)
            if a is False:
                return True
            return _not3(_and3(a, _not3(right(env))))

        return imp
    if isinstance(f, Iff):
        left, right = compile_formula(f.left, S), compile_formula(f.right, S)

        def iff(env):
            a, b = left(env), right(env)
            if a is None or b is None:
                return None
            return a == b

        return iff
    if isinstance(f, (Forall, Exists)):
        body = compile_formula(f.body, S)
        key = f.var if f.arity == 0 else (f.var, f.arity)
        domain = S.domain
        arity = f.arity
        want = isinstance(f, Exists)

        def quant(env):
            values, complete = domain(arity)
            missing = object()
            saved = env.get(key, missing)
            unsettled = not complete
            try:
                for v in values:
                    env[key] = v
                    r = body(env)
                    if r is want:
                        return want
                    if r is None:
                        unsettled = True
            finally:
                if saved is missing:
                    env.pop(key, None)
                else:
                    env[key] = saved
            return None if unsettled else not want

        return quant
    raise TypeError(f"not a formula: {f!r}")


def build_env(S, f, asg: dict | None) -> dict:
    """Resolve a user assignment against the free variables of ``f``."""
    asg = dict(asg or {})
    objs, concepts = free_variables(f)
    env = {}
    for name in objs:
        if name not in asg:
            raise EvaluationError(f"assignment misses object variable {name}")
        env[name] = asg[name]
    for name, arity in concepts:
        value = asg.get((name, arity), asg.get(name))
        if value is None:
            const = S.constants.get(name)
            if const is not None and const[0] == arity:
                continue
            raise EvaluationError(f"assignment misses concept variable {name}:{arity}")
        if isinstance(value, (set, frozenset, list, tuple)):
            value = S.make_concept(as_relation(value, arity), arity)
        env[(name, arity)] = value
    return env


def truth(S, f, asg: dict | None = None):
    """Three-valued truth value of ``f`` under ``asg``."""
    return compile_formula(f, S)(build_env(S, f, asg))


def evaluate(S, f, asg: dict | None = None):
    """Truth of ``f`` in ``S``.

    Exhaustive structures give a ``bool``; lazy ones give a ``Verdict``
    whose status is ``Unknown`` when a quantifier search ran out of budget.
    Raises ``ExtUndefinedError`` when an extension operator is applied off
    its domain.
    """
    value = truth(S, f, asg)
    if not S.lazy:
        if value is None:
            raise StructureError("exhaustive evaluation produced an unsettled value")
        return value
    status = {True: HOLDS, False: FAILS, None: UNKNOWN}[value]
    witness = None
    if value is False:
        witness = {"formula": to_text(f), "assignment": dict(asg or {})}
    return Verdict(status, schema="evaluate", witness=witness, bound={"budget": S.budget})
