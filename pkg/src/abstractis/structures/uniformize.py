"""Least-witness uniformisation of binary relations."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence


def _rank_of(order) -> Callable:
    if order is None:
        return lambda y: y
    if callable(order):
        return order
    position = {y: i for i, y in enumerate(order)}
    return position.__getitem__


def uniformize(R: Iterable[tuple], order: Sequence | Callable | None = None) -> frozenset:
    """Keep, for every ``x`` in the domain of ``R``, only the least ``y`` with ``R(x, y)``.

    ``order`` lists the range side in increasing order, or is a sort key;
    by default values are compared directly.
    """
    key = _rank_of(order)
    best: dict = {}
    for x, y in R:
        cur = best.get(x)
        if cur is None or key(y) < key(cur[0]):
            best[x] = (y,)
    return frozenset((x, ys[0]) for x, ys in best.items())


def right_inverse(surjection: dict, order: Sequence | Callable | None = None) -> dict:
    """A map ``ι`` with ``surjection[ι(v)] = v``, choosing least preimages."""
    graph = ((v, k) for k, v in surjection.items())
    return dict(uniformize(graph, order))
