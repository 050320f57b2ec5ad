"""Recursive-descent parser for the formula grammar.

    formula  := iff
    iff      := imp ('<->' imp)*
    imp      := disj ('->' imp)?
    disj     := conj ('|' conj)*
    conj     := unary ('&' unary)*
    unary    := 'not' unary | quant | atom | '(' formula ')'
    quant    := ('forall' | 'exists') binder (',' binder)* '.' formula
    binder   := lower | Upper (':' INT)?
    atom     := oterm ('=' | '!=' | '<') oterm
              | cterm '==' cterm
              | cterm '(' oterm (',' oterm)* ')'
    oterm    := lower | INT | 'quoted' | HF-literal | 'ext' INT '(' cterm ')'
    cterm    := Upper ('[' oterm (',' oterm)* ']')*

Lower-case identifiers are object variables, capitalised ones concept
variables.  Free concept variables get their arity from how they are used
(or from ``arities=``); bound ones from their binder, default 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..hf import parse_hf
from .syntax import (
    App,
    ArityError,
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
    And,
    Pred,
)

KEYWORDS = {"forall", "exists", "not"}


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}: {text[max(0, offset - 10):offset + 10]!r}")


@dataclass
class _Tok:
    kind: str
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<ceq>==)
  | (?P<neq>!=)
  | (?P<sym>[=<&|().,:\[\]])
  | (?P<int>\d+)
  | (?P<quoted>'[^']*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<hf>\{)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind == "hf":
            depth, end = 0, pos
            while end < len(text):
                if text[end] == "{":
                    depth += 1
                elif text[end] == "}":
                    depth -= 1
                    if depth == 0:
                        break
                end += 1
            if depth != 0:
                raise FormulaSyntaxError("unterminated HF literal", pos, text)
            toks.append(_Tok("hf", text[pos:end + 1], pos))
            pos = end + 1
            continue
        if kind != "ws":
            value = m.group()
            toks.append(_Tok(kind if kind != "sym" else value, value, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _PendingVar:
    """A free concept variable whose arity is not yet known."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name


class _Parser:
    def __init__(self, text: str, arities: dict, ext_arities: dict):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.scope: list[tuple[str, int]] = []
        self.hints = dict(arities)
        self.ext_arities = ext_arities

    # -- token helpers
    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {kind!r}, found {t.value or 'end of input'!r}")
        return self.next()

    def fail(self, msg: str, pos: int | None = None):
        raise FormulaSyntaxError(msg, self.peek().pos if pos is None else pos, self.text)

    # -- grammar
    def parse(self):
        f = self.formula()
        if self.peek().kind != "eof":
            self.fail(f"unexpected {self.peek().value!r}")
        return f

    def formula(self):
        left = self.implication()
        while self.peek().kind == "iff":
            self.next()
            left = ("iff", left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.peek().kind == "imp":
            self.next()
            return ("imp", left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek().kind == "|":
            self.next()
            left = ("or", left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek().kind == "&":
            self.next()
            left = ("and", left, self.unary())
        return left

    def unary(self):
        t = self.peek()
        if t.kind == "ident" and t.value == "not":
            self.next()
            return ("not", self.unary())
        if t.kind == "ident" and t.value in ("forall", "exists"):
            return self.quantified()
        if t.kind == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def quantified(self):
        q = self.next().value
        binders = [self.binder()]
        while self.peek().kind == ",":
            self.next()
            binders.append(self.binder())
        self.expect(".")
        self.scope.extend(binders)
        body = self.formula()
        del self.scope[-len(binders):]
        for name, arity in reversed(binders):
            body = (q, name, arity, body)
        return body

    def binder(self):
        t = self.expect("ident")
        if t.value in KEYWORDS:
            self.fail(f"{t.value!r} cannot be bound", t.pos)
        if t.value[0].isupper():
            arity = 1
            if self.peek().kind == ":":
                self.next()
                arity = int(self.expect("int").value)
                if arity < 1:
                    self.fail("concept arity must be >= 1")
            return t.value, arity
        if self.peek().kind == ":":
            self.fail("object variables take no arity tag")
        return t.value, 0

    def atom(self):
        t = self.peek()
        if t.kind == "ident" and t.value[0].isupper():
            c = self.concept_term()
            nxt = self.peek()
            if nxt.kind == "ceq":
                self.next()
                return ("ceq", c, self.concept_term())
            if nxt.kind == "(":
                self.next()
                args = self.term_list(")")
                return ("pred", c, args)
            self.fail("expected '==' or '(' after concept term")
        left = self.obj_term()
        op = self.peek()
        if op.kind not in ("=", "neq", "<"):
            self.fail("expected '=', '!=' or '<' after object term")
        self.next()
        right = self.obj_term()
        if op.kind == "=":
            return ("eq", left, right)
        if op.kind == "<":
            return ("lt", left, right)
        return ("not", ("eq", left, right))

    def term_list(self, closer: str) -> tuple:
        args = [self.obj_term()]
        while self.peek().kind == ",":
            self.next()
            args.append(self.obj_term())
        self.expect(closer)
        return tuple(args)

    def obj_term(self):
        t = self.next()
        if t.kind == "int":
            return ObjConst(int(t.value))
        if t.kind == "quoted":
            return ObjConst(t.value[1:-1])
        if t.kind == "hf":
            try:
                return ObjConst(parse_hf(t.value))
            except ValueError as exc:
                self.fail(str(exc), t.pos)
        if t.kind == "ident":
            m = re.fullmatch(r"ext(\d+)", t.value)
            if m and self.peek().kind == "(":
                self.next()
                arg = self.concept_term()
                self.expect(")")
                op = int(m.group(1))
                if op < 1:
                    self.fail("extension operators are numbered from 1", t.pos)
                return ("ext", op, arg, t.pos)
            if t.value in KEYWORDS:
                self.fail(f"keyword {t.value!r} where a term was expected", t.pos)
            if t.value[0].isupper():
                self.fail(f"concept {t.value!r} used where an object term was expected", t.pos)
            return ObjVar(t.value)
        self.fail(f"expected an object term, found {t.value or 'end of input'!r}", t.pos)

    def concept_term(self):
        t = self.expect("ident")
        if not t.value[0].isupper():
            self.fail(f"expected a concept variable, found {t.value!r}", t.pos)
        base = None
        for name, arity in reversed(self.scope):
            if name == t.value and arity > 0:
                base = ("cvar", name, arity)
                break
        if base is None:
            base = ("free", t.value, t.pos)
        while self.peek().kind == "[":
            self.next()
            base = ("app", base, self.term_list("]"))
        return base


# --- arity resolution ----------------------------------------------------------


def _collect(node, want, constraints, ext_arities):
    """Record arity constraints ``name -> arity`` for free concept variables."""
    kind = node[0] if isinstance(node, tuple) else None
    if kind == "free":
        if want is not None:
            constraints.setdefault(node[1], set()).add(want)
        return
    if kind == "app":
        inner_want = None if want is None else want + len(node[2])
        _collect(node[1], inner_want, constraints, ext_arities)
        for a in node[2]:
            _collect(a, None, constraints, ext_arities)
        return
    if kind == "ext":
        _collect(node[2], ext_arities.get(node[1], 1), constraints, ext_arities)
        return
    if kind == "pred":
        _collect(node[1], len(node[2]), constraints, ext_arities)
        for a in node[2]:
            _collect(a, None, constraints, ext_arities)
        return
    if kind == "ceq":
        la, ra = _known_arity(node[1], constraints), _known_arity(node[2], constraints)
        _collect(node[1], ra, constraints, ext_arities)
        _collect(node[2], la, constraints, ext_arities)
        return
    if kind in ("eq", "lt"):
        _collect(node[1], None, constraints, ext_arities)
        _collect(node[2], None, constraints, ext_arities)
        return
    if kind == "not":
        _collect(node[1], None, constraints, ext_arities)
        return
    if kind in ("and", "or", "imp", "iff"):
        _collect(node[1], None, constraints, ext_arities)
        _collect(node[2], None, constraints, ext_arities)
        return
    if kind in ("forall", "exists"):
        _collect(node[3], None, constraints, ext_arities)


def _known_arity(node, constraints):
    kind = node[0]
    if kind == "cvar":
        return node[2]
    if kind == "free":
        got = constraints.get(node[1])
        return next(iter(got)) if got and len(got) == 1 else None
    if kind == "app":
        inner = _known_arity(node[1], constraints)
        return None if inner is None else inner - len(node[2])
    return None


class _Builder:
    def __init__(self, arities: dict, text: str, ext_arities: dict):
        self.arities = arities
        self.text = text
        self.ext_arities = ext_arities

    def concept(self, node):
        kind = node[0]
        if kind == "cvar":
            return ConceptVar(node[1], node[2])
        if kind == "free":
            arity = self.arities.get(node[1])
            if arity is None:
                raise FormulaSyntaxError(f"cannot determine the arity of {node[1]}", node[2], self.text)
            return ConceptVar(node[1], arity)
        return App(self.concept(node[1]), tuple(self.term(a) for a in node[2]))

    def term(self, node):
        if isinstance(node, tuple) and node[0] == "ext":
            arg = self.concept(node[2])
            declared = self.ext_arities.get(node[1], 1)
            if arg.arity != declared:
                raise ArityError(f"ext{node[1]} takes a {declared}-ary concept, got arity {arg.arity}")
            return Ext(node[1], arg)
        return node

    def formula(self, node):
        kind = node[0]
        if kind == "eq":
            return Eq(self.term(node[1]), self.term(node[2]))
        if kind == "lt":
            return Less(self.term(node[1]), self.term(node[2]))
        if kind == "ceq":
            return ConceptEq(self.concept(node[1]), self.concept(node[2]))
        if kind == "pred":
            return Pred(self.concept(node[1]), tuple(self.term(a) for a in node[2]))
        if kind == "not":
            return Not(self.formula(node[1]))
        if kind in ("and", "or", "imp", "iff"):
            cls = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[kind]
            return cls(self.formula(node[1]), self.formula(node[2]))
        cls = Forall if kind == "forall" else Exists
        return cls(node[1], node[2], self.formula(node[3]))


def parse(text: str, arities: dict | None = None, ext_arities: dict | None = None):
    """Parse ``text`` into a formula AST.

    ``arities`` fixes arities of free concept variables; ``ext_arities`` maps
    extension-operator numbers to the arity of concepts they accept (default 1).
    """
    ext_arities = dict(ext_arities or {})
    p = _Parser(text, arities or {}, ext_arities)
    raw = p.parse()
    constraints: dict[str, set] = {k: {v} for k, v in (arities or {}).items()}
    # equality atoms may need two passes to propagate
    for _ in range(3):
        _collect(raw, None, constraints, ext_arities)
    resolved = {}
    for name, found in constraints.items():
        if len(found) > 1:
            raise ArityError(f"{name} is used with arities {sorted(found)}")
        resolved[name] = next(iter(found))
    return _Builder(resolved, text, ext_arities).formula(raw)
