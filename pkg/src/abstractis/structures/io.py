"""Reading and writing structure files.

A structure file is line based::

    abstractis-structure 1
    name von-neumann-012
    objects 0 1 2
    order 0 1 2
    concepts 1: {} {0} {0,1}
    ext 1 1: {} -> 0; {0} -> 1; {0,1} -> 2
    const In 2: {(0,1)}

``ext I N:`` gives operator ``I`` on ``N``-ary concepts.  Objects are
integers, identifiers or single-quoted strings.  A file may instead name a
builtin structure: ``builtin newv-hf rank=2`` (or ``budget=64``).  ``#`` starts a comment.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

from .model import SOStructure, StructureError

HEADER = "abstractis-structure"
VERSION = 1

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][A-Za-z0-9_]*)|'((?:[^'\\]|\\.)*)'|(->|[{}(),;]))")


class StructureFileError(StructureError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def format_object(o) -> str:
    if isinstance(o, bool):
        raise StructureFileError(f"cannot write object {o!r}")
    if isinstance(o, int):
        return str(o)
    if isinstance(o, str):
        if _IDENT.match(o):
            return o
        return "'" + o.replace("\\", "\\\\").replace("'", "\\'") + "'"
    raise StructureFileError(f"cannot write object of type {type(o).__name__}")


def format_relation(rel, arity: int, S=None) -> str:
    tuples = sorted(rel, key=(lambda t: [S.index[a] for a in t]) if S is not None else None)
    if arity == 1:
        return "{" + ",".join(format_object(t[0]) for t in tuples) + "}"
    return "{" + ",".join("(" + ",".join(map(format_object, t)) + ")" for t in tuples) + "}"


def dumps(S: SOStructure) -> str:
    if S.lazy:
        raise StructureFileError("lazy structures are stored by builtin id")
    lines = [f"{HEADER} {VERSION}"]
    if S.name:
        lines.append(f"name {S.name}")
    lines.append("objects " + " ".join(map(format_object, S.objects)) if S.objects else "objects")
    if S.order is not None:
        lines.append("order " + " ".join(map(format_object, S.order)) if S.order else "order")
    for arity in sorted(S.concepts):
        fam = S.concepts[arity]
        lines.append(f"concepts {arity}: " + " ".join(format_relation(c, arity, S) for c in fam))
    for i, op in enumerate(S.ext, start=1):
        items = [
            f"{format_relation(c, op.arity, S)} -> {format_object(v)}"
            for c, v in sorted(op.table.items(), key=lambda kv: S.concept_code(kv[0]))
        ]
        lines.append(f"ext {i} {op.arity}: " + "; ".join(items))
    for name, (arity, rel) in sorted(S.constants.items()):
        lines.append(f"const {name} {arity}: {format_relation(rel, arity, S)}")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str, line: int):
        self.tokens = []
        self.line = line
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise StructureFileError(f"unexpected text {text[pos:pos + 12]!r}", line)
            num, ident, quoted, punct = m.groups()
            if num is not None:
                self.tokens.append(("obj", int(num)))
            elif ident is not None:
                self.tokens.append(("obj", ident))
            elif quoted is not None:
                self.tokens.append(("obj", re.sub(r"\\(.)", r"\1", quoted)))
            else:
                self.tokens.append(("p", punct))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, punct=None):
        kind, value = self.peek()
        if kind is None:
            raise StructureFileError("unexpected end of line", self.line)
        if punct is not None and (kind != "p" or value != punct):
            raise StructureFileError(f"expected {punct!r}, found {value!r}", self.line)
        self.i += 1
        return kind, value

    def obj(self):
        kind, value = self.take()
        if kind != "obj":
            raise StructureFileError(f"expected an object, found {value!r}", self.line)
        return value

    def done(self) -> bool:
        return self.i >= len(self.tokens)

    def relation(self, arity: int) -> frozenset:
        self.take("{")
        out = []
        if self.peek() != ("p", "}"):
            while True:
                if arity == 1:
                    out.append((self.obj(),))
                else:
                    self.take("(")
                    t = [self.obj()]
                    while self.peek() == ("p", ","):
                        self.take(",")
                        t.append(self.obj())
                    self.take(")")
                    if len(t) != arity:
                        raise StructureFileError(f"tuple {tuple(t)} has arity {len(t)}, expected {arity}", self.line)
                    out.append(tuple(t))
                if self.peek() == ("p", ","):
                    self.take(",")
                    continue
                break
        self.take("}")
        return frozenset(out)


def _arity_prefix(rest: str, line: int, fields: int) -> tuple[list[int], str]:
    head, sep, body = rest.partition(":")
    if not sep:
        raise StructureFileError("missing ':'", line)
    try:
        nums = [int(x) for x in head.split()]
    except ValueError:
        raise StructureFileError(f"bad arity header {head.strip()!r}", line) from None
    if len(nums) != fields or any(n < 1 for n in nums):
        raise StructureFileError(f"bad arity header {head.strip()!r}", line)
    return nums, body


def loads(text: str):
    """Parse a structure file; builtin references are resolved."""
    lines = [(n, raw.split("#", 1)[0].strip()) for n, raw in enumerate(text.splitlines(), start=1)]
    lines = [(n, s) for n, s in lines if s]
    if not lines:
        raise StructureFileError("empty structure file")
    n0, first = lines[0]
    parts = first.split()
    if len(parts) != 2 or parts[0] != HEADER:
        raise StructureFileError(f"missing header '{HEADER} {VERSION}'", n0)
    if parts[1] != str(VERSION):
        raise StructureFileError(f"unsupported version {parts[1]}", n0)
    name = ""
    objects = None
    order = None
    concepts: dict = {}
    ext: dict = {}
    constants: dict = {}
    for n, line in lines[1:]:
        key, _, rest = line.partition(" ")
        if key == "builtin":
            if len(lines) != 2:
                raise StructureFileError("a builtin reference stands alone", n)
            ident, *params = rest.split()
            return builtin(ident, **_params(params, n))
        if key == "name":
            name = rest.strip()
        elif key in ("objects", "order"):
            r = _Reader(rest, n)
            items = []
            while not r.done():
                items.append(r.obj())
            if key == "objects":
                objects = items
            else:
                order = items
        elif key == "concepts":
            (arity,), body = _arity_prefix(rest, n, 1)
            r = _Reader(body, n)
            fam = concepts.setdefault(arity, [])
            while not r.done():
                fam.append(r.relation(arity))
        elif key == "ext":
            (i, arity), body = _arity_prefix(rest, n, 2)
            if i in ext:
                raise StructureFileError(f"operator ext{i} given twice", n)
            r = _Reader(body, n)
            table = {}
            while not r.done():
                c = r.relation(arity)
                r.take("->")
                if c in table:
                    raise StructureFileError(f"ext{i} given twice on one concept", n)
                table[c] = r.obj()
                if not r.done():
                    r.take(";")
            ext[i] = (arity, table)
        elif key == "const":
            cname, _, body = rest.partition(" ")
            (arity,), body = _arity_prefix(body, n, 1)
            r = _Reader(body, n)
            constants[cname] = (arity, r.relation(arity))
            if not r.done():
                raise StructureFileError("trailing text after constant", n)
        else:
            raise StructureFileError(f"unknown directive {key!r}", n)
    if objects is None:
        raise StructureFileError("missing 'objects' line")
    if sorted(ext) != list(range(1, len(ext) + 1)):
        raise StructureFileError("operators must be numbered 1, 2, ... without gaps")
    try:
        return SOStructure(objects, concepts, ext=[ext[i] for i in sorted(ext)], order=order, constants=constants, name=name)
    except StructureFileError:
        raise
    except StructureError as exc:
        raise StructureFileError(str(exc)) from None


def _params(items, line=None) -> dict:
    out = {}
    for item in items:
        k, sep, v = item.partition("=")
        if not sep:
            raise StructureFileError(f"builtin parameter {item!r} is not key=value", line)
        out[k] = int(v) if re.fullmatch(r"-?\d+", v) else v
    return out


def builtin(ident: str, **params):
    """A builtin structure by id: any fixture name, ``newv-hf`` or ``newv-fragment``."""
    from .. import fixtures, newv

    if ident == "newv-hf":
        if "rank" in params:
            # quantifiers then range over the HF sets of rank at most r
            from ..hf import tower

            return newv.newv_structure(budget=tower(int(params["rank"]) + 1))
        return newv.newv_structure(budget=int(params.get("budget", 64)))
    if ident == "newv-fragment":
        return newv.fragment_structure(int(params.get("rank", 3)))
    if params:
        raise StructureFileError(f"builtin {ident} takes no parameters")
    try:
        return fixtures.fixture(ident)
    except KeyError as exc:
        raise StructureFileError(str(exc.args[0])) from None


def load_structure(source):
    """Load from a path, from ``builtin:<id>[?k=v&...]`` or from a bare builtin id."""
    source = str(source)
    if source.startswith("builtin:"):
        ident, _, query = source[len("builtin:"):].partition("?")
        return builtin(ident, **_params([q for q in query.split("&") if q]))
    path = Path(source)
    if path.exists():
        return loads(path.read_text())
    from .. import fixtures

    if source in fixtures.FIXTURES or source in ("newv-hf", "newv-fragment"):
        return builtin(source)
    raise StructureFileError(f"no such structure file or builtin: {source}")


def save_structure(S: SOStructure, path) -> None:
    """Write atomically: a temporary sibling file is renamed into place."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(S))
    os.replace(tmp, path)
