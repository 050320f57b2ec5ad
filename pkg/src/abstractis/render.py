"""Turning objects, concepts and formulas into text and JSON-ready values."""

from __future__ import annotations

from .hf import HFSet, format_hf


def _sort_key(v):
    return (type(v).__name__, render_value(v))


def render_value(v) -> str:
    if isinstance(v, HFSet):
        return format_hf(v)
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ",".join(render_value(x) for x in v) + ")"
    if isinstance(v, (frozenset, set)):
        items = sorted(v, key=_sort_key)
        if items and all(isinstance(t, tuple) and len(t) == 1 for t in items):
            return "{" + ",".join(render_value(t[0]) for t in items) + "}"
        return "{" + ",".join(render_value(x) for x in items) + "}"
    if hasattr(v, "render"):
        return v.render()
    return repr(v)


def jsonable(v):
    """Convert to plain JSON types, deterministically ordered."""
    from .logic.syntax import ATOMS, BINARY, QUANTIFIERS, Not, to_text

    if v is None or isinstance(v, (bool, int, float, str)):
        return v
    if isinstance(v, HFSet):
        return format_hf(v)
    if isinstance(v, dict):
        return {str(k) if isinstance(k, str) else render_value(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (frozenset, set)):
        return render_value(v)
    if isinstance(v, ATOMS + (Not,) + tuple(BINARY) + tuple(QUANTIFIERS)):
        return to_text(v)
    if hasattr(v, "to_json"):
        return v.to_json()
    if hasattr(v, "render"):
        return v.render()
    return repr(v)
