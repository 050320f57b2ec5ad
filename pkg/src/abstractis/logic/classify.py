"""Quantifier-prefix classification of formulas."""

from __future__ import annotations

from .syntax import ATOMS, Exists, Forall, Not


def has_concept_quantifier(f) -> bool:
    if isinstance(f, ATOMS):
        return False
    if isinstance(f, (Forall, Exists)):
        return f.arity > 0 or has_concept_quantifier(f.body)
    if isinstance(f, Not):
        return has_concept_quantifier(f.body)
    return has_concept_quantifier(f.left) or has_concept_quantifier(f.right)


def classify(f) -> str:
    """Return ``"FO"``, ``"Sigma1_m"``, ``"Pi1_m"`` or ``"other"``.

    The prefix is read through negations (which swap the quantifier kind) and
    object quantifiers; every concept quantifier must sit in that prefix, with
    a concept-quantifier-free matrix.  ``m`` counts alternating blocks.
    """
    if not has_concept_quantifier(f):
        return "FO"
    blocks: list[str] = []
    positive = True
    node = f
    while True:
        if isinstance(node, Not):
            positive = not positive
            node = node.body
            continue
        if isinstance(node, (Forall, Exists)):
            if node.arity > 0:
                kind = "E" if isinstance(node, Exists) == positive else "A"
                if not blocks or blocks[-1] != kind:
                    blocks.append(kind)
            node = node.body
            continue
        break
    if has_concept_quantifier(node):
        return "other"
    head = "Sigma" if blocks[0] == "E" else "Pi"
    return f"{head}1_{len(blocks)}"
