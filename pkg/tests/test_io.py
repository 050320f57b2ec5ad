from pathlib import Path

import pytest

from abstractis.fixtures import FIXTURES, corpus, fixture, outside_corpus
from abstractis.structures.io import StructureFileError, dumps, load_structure, loads, save_structure

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def same(a, b):
    return (
        a.objects == b.objects
        and a.order == b.order
        and {k: set(v) for k, v in a.concepts.items()} == {k: set(v) for k, v in b.concepts.items()}
        and [(op.arity, op.table) for op in a.ext] == [(op.arity, op.table) for op in b.ext]
        and a.constants == b.constants
    )


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_round_trip(name):
    S = fixture(name)
    assert same(loads(dumps(S)), S)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_shipped_files_match_builders(name):
    assert same(load_structure(FIXTURE_DIR / f"{name}.sos"), fixture(name))


def test_corpus_split():
    assert len(corpus()) + len(outside_corpus()) == len(FIXTURES)
    assert len(corpus()) >= 20


def test_builtins():
    assert load_structure("builtin:von-neumann-012").objects == (0, 1, 2)
    assert load_structure("builtin:newv-hf?budget=8").budget == 8
    assert load_structure("builtin:newv-hf?rank=2").budget == 4
    assert len(load_structure("builtin:newv-fragment?rank=2").objects) == 2
    assert loads("abstractis-structure 1\nbuiltin newv-hf budget=5\n").budget == 5


def test_save_is_atomic(tmp_path):
    path = tmp_path / "s.sos"
    save_structure(fixture("two-cycle"), path)
    assert same(load_structure(path), fixture("two-cycle"))
    assert [p.name for p in tmp_path.iterdir()] == ["s.sos"]


def test_quoted_objects():
    text = "abstractis-structure 1\nobjects 'a b' x 3\nconcepts 1: {'a b',3} {}\n# note\next 1 1: {} -> x\n"
    S = loads(text)
    assert S.objects == ("a b", "x", 3)
    assert same(loads(dumps(S)), S)


@pytest.mark.parametrize(
    "text",
    [
        "",
        "abstractis-structure 2\nobjects 0\n",
        "abstractis-structure 1\n",
        "abstractis-structure 1\nobjects 0\nconcepts 1: {1}\n",
        "abstractis-structure 1\nobjects 0\nconcepts 2: {(0)}\n",
        "abstractis-structure 1\nobjects 0\next 2 1: {} -> 0\n",
        "abstractis-structure 1\nobjects 0\nfrobnicate\n",
        "abstractis-structure 1\nobjects 0\nbuiltin newv-hf\n",
        "abstractis-structure 1\nbuiltin no-such-thing\n",
    ],
)
def test_bad_files(text):
    with pytest.raises(StructureFileError):
        loads(text)


def test_lazy_structures_are_not_written():
    with pytest.raises(StructureFileError):
        dumps(load_structure("newv-hf"))
