"""Small hand-built structures with a unary extension operator.

Every fixture is rebuilt on each call.  ``corpus()`` lists the structures on
which the well-founded extensions of the two levels are compared; in the
``OUTSIDE`` group a vacuous object-level closure (the set of all objects)
drags in a non-extension or an ill-founded object, so there the meta level
accepts extensions the concept level rejects, or two concepts share an
extension, so the collapse does not invert ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .hf import EMPTY, HFSet, ack_code, hf_universe, von_neumann
from .structures.model import SOStructure


def _rel(*items) -> frozenset:
    return frozenset((x,) for x in items)


def from_table(objects, table: dict, extra=(), order=None, name="", binary=()) -> SOStructure:
    """Objects plus ``{members: value}``; ``extra`` adds concepts without a value."""
    concepts = [_rel(*k) for k in table] + [_rel(*k) for k in extra]
    ext = {_rel(*k): v for k, v in table.items()}
    fam = {1: concepts}
    if binary:
        fam[2] = [frozenset(r) for r in binary]
    return SOStructure(objects, fam, ext=[(1, ext)], order=order, name=name)


def hf_structure(sets, name="") -> SOStructure:
    """Objects are Ackermann codes of the given sets, ``∂`` sends a set's members to it."""
    sets = sorted(set(sets))
    codes = {s: ack_code(s) for s in sets}
    table = {tuple(codes[e] for e in s): codes[s] for s in sets if all(e in codes for e in s)}
    objs = [codes[s] for s in sets]
    return from_table(objs, table, order=objs, name=name)


def transitive_closure_family(s: HFSet) -> list:
    out = {s}
    stack = [s]
    while stack:
        for e in stack.pop():
            if e not in out:
                out.add(e)
                stack.append(e)
    return sorted(out)


def von_neumann_012() -> SOStructure:
    return from_table([0, 1, 2], {(): 0, (0,): 1, (0, 1): 2}, order=[0, 1, 2], name="von-neumann-012")


def von_neumann_prefix(n: int) -> SOStructure:
    table = {tuple(range(k)): k for k in range(n)}
    return from_table(list(range(n)), table, order=list(range(n)), name=f"von-neumann-{n}")


def zermelo_012() -> SOStructure:
    return from_table([0, 1, 2], {(): 0, (0,): 1, (1,): 2}, order=[0, 1, 2], name="zermelo-012")


def quine_atom() -> SOStructure:
    return from_table(["q"], {("q",): "q"}, name="quine-atom")


def two_cycle() -> SOStructure:
    # a η b η a, but {a, b} is not a concept, so no subconcept exposes the cycle
    return from_table(["a", "b"], {("b",): "a", ("a",): "b"}, name="two-cycle")


def three_cycle() -> SOStructure:
    return from_table(["a", "b", "c"], {("a",): "b", ("b",): "c", ("c",): "a"}, name="three-cycle")


def three_cycle_exposed() -> SOStructure:
    return from_table(
        ["a", "b", "c"], {("a",): "b", ("b",): "c", ("c",): "a"}, extra=[("a", "b", "c")], name="three-cycle-exposed"
    )


def quine_beside_ordinals() -> SOStructure:
    return from_table([0, 1, 2, "q"], {(): 0, (0,): 1, (0, 1): 2, ("q",): "q"}, name="quine-beside-ordinals")


def self_member_above_empty() -> SOStructure:
    return from_table([0, "q"], {(): 0, (0, "q"): "q"}, name="self-member-above-empty")


def empty() -> SOStructure:
    return SOStructure([], {1: [frozenset()]}, ext=[(1, {})], name="empty")


def only_empty_concept() -> SOStructure:
    return from_table([0], {(): 0}, order=[0], name="only-empty-concept")


def non_extensional() -> SOStructure:
    # a and b both have η-members {z, w, v}: b through two concepts, a through one
    table = {(): "z", ("z",): "w", ("w",): "v", ("z", "w", "v"): "a", ("z", "w"): "b", ("v",): "b"}
    return from_table(["z", "w", "v", "a", "b"], table, name="non-extensional")


def non_extensional_twins() -> SOStructure:
    table = {(): 0, (0,): 1, (1,): 2, (0, 1, 2): 3, (0, 1): 4, (2,): 4, (0, 2): 5, (1, 2): 5}
    return from_table(list(range(6)), table, order=list(range(6)), name="non-extensional-twins")


def noninjective_ordinals() -> SOStructure:
    # {0,1} and {1} share the value 2, so 2 still has members {0, 1}
    return from_table([0, 1, 2], {(): 0, (0,): 1, (0, 1): 2, (1,): 2}, order=[0, 1, 2], name="noninjective-ordinals")


def partial_operator() -> SOStructure:
    return from_table([0, 1, 2], {(): 0, (0,): 1, (0, 1): 2}, extra=[(1,), (2,)], order=[0, 1, 2], name="partial-operator")


def dangling_member() -> SOStructure:
    # 3 is no extension yet belongs to the concept with value 4
    return from_table([0, 1, 2, 3, 4], {(): 0, (0,): 1, (0, 1): 2, (0, 3): 4}, order=[0, 1, 2, 3, 4], name="dangling-member")


def with_binary_witness() -> SOStructure:
    # the relation R with R[1] = {0} and R[2] = {0, 1}
    R = {(1, 0), (2, 0), (2, 1)}
    return from_table(
        [0, 1, 2], {(): 0, (0,): 1, (0, 1): 2}, extra=[(1, 2)], order=[0, 1, 2], name="with-binary-witness",
        binary=[R, {(0, 1), (0, 2), (1, 2)}],
    )


def two_operators() -> SOStructure:
    rels = [_rel(), _rel(0), _rel(0, 1)]
    return SOStructure(
        [0, 1, 2],
        {1: rels},
        ext=[(1, dict(zip(rels, [0, 1, 2]))), (1, dict(zip(rels, [2, 1, 0])))],
        order=[0, 1, 2],
        name="two-operators",
    )


def kuratowski_pair_01() -> SOStructure:
    from .hf import ONE, pair

    return hf_structure(transitive_closure_family(pair(EMPTY, ONE)), name="kuratowski-pair-01")


def urelement() -> SOStructure:
    return from_table([0, "u"], {(): 0}, extra=[("u",)], name="urelement")


def running_plus_urelement() -> SOStructure:
    return from_table([0, 1, 2, "u"], {(): 0, (0,): 1, (0, 1): 2}, name="running-plus-urelement")


@dataclass(frozen=True)
class Fixture:
    name: str
    build: Callable[[], SOStructure]
    description: str
    extensional: bool = True


FIXTURES: dict[str, Fixture] = {}


def _register(name, build, description, extensional=True):
    FIXTURES[name] = Fixture(name, build, description, extensional)


_register("von-neumann-012", von_neumann_012, "ordinals 0, 1, 2")
_register("von-neumann-4", lambda: von_neumann_prefix(4), "ordinals 0..3")
_register("von-neumann-5", lambda: von_neumann_prefix(5), "ordinals 0..4")
_register("zermelo-012", zermelo_012, "0, {0}, {{0}}")
_register("hf-v2", lambda: hf_structure(hf_universe(2), "hf-v2"), "all sets of rank below 2, by code")
_register("hf-v3", lambda: hf_structure(hf_universe(3), "hf-v3"), "all sets of rank below 3, by code")
_register("hf-v4", lambda: hf_structure(hf_universe(4), "hf-v4"), "all sets of rank below 4, by code")
_register("hf-ordinal-4", lambda: hf_structure(transitive_closure_family(von_neumann(4)), "hf-ordinal-4"), "the ordinal 4 and its members")
_register("kuratowski-pair-01", kuratowski_pair_01, "the pair <0,1> and its transitive closure")
_register("quine-atom", quine_atom, "q = ext({q})")
_register("two-cycle", two_cycle, "a η b η a with no concept exposing it")
_register("three-cycle", three_cycle, "a η b η c η a")
_register("three-cycle-exposed", three_cycle_exposed, "three-cycle plus the concept {a,b,c}")
_register("quine-beside-ordinals", quine_beside_ordinals, "ordinals 0..2 next to a Quine atom")
_register("self-member-above-empty", self_member_above_empty, "q = ext({0, q})")
_register("empty", empty, "no objects")
_register("only-empty-concept", only_empty_concept, "one object, the extension of the empty concept")
_register("non-extensional", non_extensional, "two extensions with the same η-members", extensional=False)
_register("non-extensional-twins", non_extensional_twins, "two pairs of η-twins", extensional=False)
_register("noninjective-ordinals", noninjective_ordinals, "ordinals where two concepts share a value")
_register("partial-operator", partial_operator, "ordinals with concepts outside the operator's domain")
_register("dangling-member", dangling_member, "an extension with a member outside rng(ext)")
_register("with-binary-witness", with_binary_witness, "ordinals plus binary concepts")
_register("two-operators", two_operators, "ordinals with a second, reversed operator")
_register("urelement", urelement, "an object that is no extension", extensional=True)
_register("running-plus-urelement", running_plus_urelement, "ordinals 0..2 next to an object that is no extension")

# wf_ext(meta) ⊄ wf_ext(concept) on the first four (vacuous closures); on the
# last, two concepts share a value, so j is not inverted by the collapse
OUTSIDE = ("quine-beside-ordinals", "dangling-member", "urelement", "running-plus-urelement", "noninjective-ordinals")


def fixture(name: str) -> SOStructure:
    try:
        return FIXTURES[name].build()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None


def corpus() -> list[SOStructure]:
    return [f.build() for name, f in FIXTURES.items() if name not in OUTSIDE]


def outside_corpus() -> list[SOStructure]:
    return [fixture(n) for n in OUTSIDE]
