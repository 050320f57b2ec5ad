"""Command line front door.

Every command prints a report (JSON or text) and can write it to a file.
Exit status: 0 when no stage failed, 1 when some stage returned ``Fails``
(or ``Unknown`` under ``--strict-unknown``), 2 for bad input.
"""

from __future__ import annotations

import json
import os
import random
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .render import jsonable, render_value
from .structures.model import FAILS, HOLDS, UNKNOWN, StructureError, Verdict

DEPTH_CAP = 6
RANK_CAP = 5
BUDGET_CAP = 1 << 20
STAGE_OPS = ("build-abstraction", "check-schema", "extract", "verify-inner-model", "defn-iterate", "axioms")


class ConfigError(click.ClickException):
    exit_code = 2


# --- reports


def _stage(name: str, verdict: Verdict | None = None, **extra) -> dict:
    out = {"stage": name}
    if verdict is not None:
        out.update(verdict.to_json())
    else:
        out.setdefault("status", HOLDS)
    out.update(jsonable(extra))
    return out


def _exit_code(stages, strict: bool) -> int:
    statuses = [s.get("status") for s in stages]
    if FAILS in statuses:
        return 1
    if strict and UNKNOWN in statuses:
        return 1
    return 0


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _text_report(report: dict) -> str:
    lines = [f"{report['command']} ({report['tool']} {report['version']})"]
    if not report["stages"]:
        lines.append("no stages")
    for s in report["stages"]:
        head = f"{s['stage']}: {s.get('status', '')}"
        if s.get("schema") and s["schema"] != s["stage"]:
            head += f" [{s['schema']}]"
        lines.append(head)
        for key in ("witness", "result"):
            if s.get(key) not in (None, [], {}):
                lines.append(f"  {key}: {_short(s[key])}")
        if s.get("flags"):
            lines.append(f"  flags: {', '.join(s['flags'])}")
    lines.append(f"exit: {report['exit']}")
    return "\n".join(lines) + "\n"


def _short(v) -> str:
    text = v if isinstance(v, str) else json.dumps(v, sort_keys=False, ensure_ascii=False)
    return text if len(text) <= 400 else text[:397] + "..."


def _emit(ctx, command: str, config: dict, stages: list) -> None:
    opts = ctx.obj
    code = _exit_code(stages, opts["strict_unknown"])
    report = {
        "tool": "abstractis",
        "version": __version__,
        "command": command,
        "config": jsonable({**config, "depth": opts["depth"], "budget": opts["budget"], "seed": opts["seed"],
                            "strict_unknown": opts["strict_unknown"]}),
        "stages": stages,
        "exit": code,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n" if opts["format"] == "json" else _text_report(report)
    if opts["output"]:
        _write_atomic(Path(opts["output"]), json.dumps(report, indent=2, ensure_ascii=False) + "\n")
    click.echo(text, nl=False)
    ctx.exit(code)


def _load(source):
    from .structures.io import load_structure

    try:
        return load_structure(source)
    except (StructureError, OSError, ValueError) as exc:
        raise ConfigError(f"cannot load structure {source}: {exc}") from None


def _guard(fn):
    """Turn library input errors into exit status 2."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        from .abstraction import AbstractionError
        from .extraction import ExtractionError
        from .logic.parser import FormulaSyntaxError
        from .logic.syntax import ArityError
        from .structures.evaluate import EvaluationError

        try:
            return fn(*args, **kwargs)
        except (FormulaSyntaxError, ArityError, EvaluationError, StructureError, AbstractionError, ExtractionError) as exc:
            raise ConfigError(str(exc)) from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    return wrapper


def _object_token(S, text: str):
    for o in S.objects:
        if render_value(o) == text:
            return o
    raise ConfigError(f"{text!r} is not an object of the structure")


def _params(S, text):
    if text in (None, "", "none"):
        return "none"
    if text == "all":
        return "all"
    return tuple(_object_token(S, t.strip()) for t in text.split(","))


# --- root


@click.group()
@click.version_option(__version__, prog_name="abstractis")
@click.option("--depth", type=click.IntRange(0, DEPTH_CAP), default=3, show_default=True, help="Formula size bound.")
@click.option("--budget", type=click.IntRange(1, BUDGET_CAP), default=64, show_default=True, help="Search budget on lazy structures.")
@click.option("--strict-unknown", is_flag=True, help="Treat Unknown verdicts as failures.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Sampling seed for lazy structures.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Also write the JSON report here.")
@click.pass_context
def main(ctx, depth, budget, strict_unknown, fmt, seed, output):
    """Check abstraction principles and extract set theory from finite structures."""
    ctx.obj = {"depth": depth, "budget": budget, "strict_unknown": strict_unknown, "format": fmt, "seed": seed, "output": output}


@main.command()
@click.argument("formula")
@click.pass_context
@_guard
def parse(ctx, formula):
    """Parse a formula and print its normal form and class."""
    from .logic.classify import classify
    from .logic.parser import parse as parse_formula
    from .logic.syntax import free_variables, size, to_text

    f = parse_formula(formula)
    objs, cons = free_variables(f)
    stage = _stage(
        "parse",
        result=to_text(f),
        **{"class": classify(f), "size": size(f), "free": sorted(objs) + [f"{n}:{a}" for n, a in sorted(cons)]},
    )
    _emit(ctx, "parse", {"formula": formula}, [stage])


def _assignment(S, items):
    from .structures.io import _Reader

    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"assignment {item!r} is not name=value")
        name = name.strip()
        value = value.strip()
        if value.startswith("{"):
            arity = 1
            if "(" in value:
                arity = value.split(")")[0].count(",") + 1
            out[name] = _Reader(value, None).relation(arity)
        else:
            out[name] = _object_token(S, value)
    return out


@main.command("eval")
@click.option("--structure", "-s", required=True, help="Structure file or builtin id.")
@click.option("--assign", "-a", multiple=True, help="x=0 or X={0,1}.")
@click.argument("formula")
@click.pass_context
@_guard
def eval_cmd(ctx, structure, assign, formula):
    """Evaluate a formula in a structure."""
    from .logic.parser import parse as parse_formula
    from .logic.syntax import to_text
    from .structures.evaluate import evaluate

    S = _load(structure)
    if S.lazy:
        S = S.with_budget(ctx.obj["budget"])
    arities = {k: (1 if all(len(t) == 1 for t in v) else len(next(iter(v))))
               for k, v in _assignment(S, assign).items() if isinstance(v, frozenset) and v}
    f = parse_formula(formula, arities=arities or None, ext_arities=S.ext_arities())
    value = evaluate(S, f, _assignment(S, assign))
    if isinstance(value, Verdict):
        verdict = value
    else:
        verdict = Verdict(HOLDS if value else FAILS, "evaluate", None if value else {"formula": to_text(f)})
    _emit(ctx, "eval", {"structure": structure, "formula": to_text(f), "assign": list(assign)}, [_stage("eval", verdict)])


@main.command()
@click.option("--structure", "-s", default=None, help="Structure file or builtin id.")
@click.option("--arity", type=click.IntRange(1, 3), default=1, show_default=True)
@click.option("--params", default="none", show_default=True, help="none, all, or a comma list of objects.")
@click.option("--second-order", is_flag=True)
@click.option("--iterate", type=click.IntRange(0, 5), default=None, help="Iterate definable powersets from the empty set.")
@click.pass_context
@_guard
def defn(ctx, structure, arity, params, second_order, iterate):
    """Definable relations of a structure, or the iterated hierarchy."""
    from .structures.definable import defn_iterate, definable_relations

    if iterate is not None:
        mode = "none" if params == "none" else "all"
        levels = defn_iterate([], iterate, params=mode)
        stages = [
            _stage(f"level {lv.index}", None, status=HOLDS if lv.equal_to_powerset else FAILS,
                   result={"size": lv.size, "powerset_size": lv.powerset_size, "exact": lv.exact})
            for lv in levels
        ]
        _emit(ctx, "defn", {"iterate": iterate, "params": mode}, stages)
        return
    if structure is None:
        raise ConfigError("give --structure or --iterate")
    S = _load(structure)
    fam = definable_relations(S, arity, _params(S, params), second_order=second_order)
    rels = fam.relations()
    stage = _stage("defn", None, result={"count": len(fam), "exact": fam.exact, "relations": [render_value(r) for r in rels]})
    _emit(ctx, "defn", {"structure": structure, "arity": arity, "params": params, "second_order": second_order}, [stage])


@main.command()
@click.option("--structure", "-s", required=True)
@click.option("--params", default="", help="Comma list of parameter objects.")
@click.pass_context
@_guard
def closure(ctx, structure, params):
    """Objects pinned down by a formula over the parameters."""
    from .structures.definable import definable_closure

    S = _load(structure)
    A = () if not params else _params(S, params)
    out = definable_closure(S, A, depth=ctx.obj["depth"])
    stage = _stage("closure", None, result=[render_value(o) for o in S.objects if o in out])
    _emit(ctx, "closure", {"structure": structure, "params": params}, [stage])


@main.command()
@click.option("--structure", "-s", required=True)
@click.pass_context
@_guard
def codes(ctx, structure):
    """The code surjection and its least-code right inverse."""
    from .structures.definable import code_surjection

    S = _load(structure)
    cs = code_surjection(S, depth=ctx.obj["depth"])
    bad = [a for a, c in cs.iota.items() if cs.theta[c] != a]
    verdict = Verdict(HOLDS if not bad else FAILS, "theta-iota", bad[0] if bad else None,
                      {"codes": len(cs.codes), "depth": cs.depth})
    stage = _stage(
        "codes", verdict,
        result={render_value(a): {"code": c[0], "formula": cs.formula_text(c)} for a, c in cs.iota.items()},
        uncovered=[render_value(a) for a in cs.uncovered],
    )
    _emit(ctx, "codes", {"structure": structure}, [stage])


@main.command()
@click.option("--relation", "-r", required=True, help="Binary relation, e.g. {(0,1),(0,2)}.")
@click.option("--order", default=None, help="Comma list giving the order of the range side.")
@click.pass_context
@_guard
def uniformize(ctx, relation, order):
    """Keep the least witness for each point of a relation."""
    from .structures.io import _Reader
    from .structures.uniformize import uniformize as unif

    R = _Reader(relation, None).relation(2)
    seq = None
    if order:
        seq = [_Reader(t.strip(), None).obj() for t in order.split(",")]
        missing = {y for _, y in R} - set(seq)
        if missing:
            raise ConfigError(f"order misses {sorted(map(str, missing))}")
    out = unif(R, seq)
    stage = _stage("uniformize", None, result=render_value(frozenset(out)))
    _emit(ctx, "uniformize", {"relation": relation, "order": order}, [stage])


@main.command()
@click.option("--structure", "-s", required=True)
@click.option("--spec", "specs", multiple=True, required=True, help="Builtin oracle name or formula in X, Y.")
@click.option("--arity", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--reclose", is_flag=True, help="Replace concept families by full powersets.")
@click.option("--save", type=click.Path(dir_okay=False), default=None, help="Write the new structure file.")
@click.pass_context
@_guard
def abstract(ctx, structure, specs, arity, reclose, save):
    """Add one extension operator per equivalence."""
    from .abstraction import AbstractionSpec, build_abstraction, verify_principle
    from .structures.io import save_structure

    S = _load(structure)
    parsed = [AbstractionSpec(s, arity=arity) for s in specs]
    T = build_abstraction(S, parsed, reclose=reclose, verify=False)
    stages = []
    for i, spec in enumerate(parsed, start=len(S.ext) + 1):
        stages.append(_stage(f"principle {i}", verify_principle(T, i, spec)))
    if save:
        save_structure(T, save)
    stages.append(_stage("structure", None, result={"objects": [render_value(o) for o in T.objects]}))
    _emit(ctx, "abstract", {"structure": structure, "specs": list(specs), "arity": arity, "reclose": reclose}, stages)


@main.command()
@click.option("--structure", "-s", required=True)
@click.option("--schema", "schemas", multiple=True, required=True, help="blv, focomp, fullcomp, delta11comp, sigma11choice, gc, abstraction:i, collection, setaxiom:<name>.")
@click.option("--params", default=None, help="Comprehension parameters: none, all or a comma list.")
@click.pass_context
@_guard
def check(ctx, structure, schemas, params):
    """Check axiom schemas on a structure."""
    from .structures.schemas import check_schema

    S = _load(structure)
    if S.lazy:
        S = S.with_budget(ctx.obj["budget"])
    policy = {"depth": ctx.obj["depth"]}
    if params is not None:
        policy["params"] = _params(S, params)
    stages = [_stage(name, check_schema(S, name, **policy)) for name in schemas]
    _emit(ctx, "check", {"structure": structure, "schemas": list(schemas), "params": params}, stages)


def _extract_stage(S, level):
    from .extraction import collapse_inner_model, wf_ext

    w = wf_ext(S, level)
    im = collapse_inner_model(S, level)
    status = HOLDS if not im.uncollapsed else FAILS
    return _stage(
        f"extract {level}", None, status=status,
        result=im.to_json(),
        wf_ext=[render_value(x) for x in w.members],
        excluded={render_value(k): v for k, v in w.excluded.items()},
        flags=sorted({f for fl in w.flags.values() for f in fl}) or None,
    )


@main.command()
@click.option("--structure", "-s", required=True)
@click.option("--level", type=click.Choice(["concept", "meta", "both"]), default="both", show_default=True)
@click.pass_context
@_guard
def extract(ctx, structure, level):
    """Well-founded extensions and the collapsed inner model."""
    S = _load(structure)
    levels = ["concept", "meta"] if level == "both" else [level]
    stages = [_extract_stage(S, lv) for lv in levels]
    for s in stages:
        if s.get("flags") is None:
            s.pop("flags", None)
    _emit(ctx, "extract", {"structure": structure, "level": level}, stages)


@main.command()
@click.option("--structure", "-s", required=True)
@click.option("--level", type=click.Choice(["concept", "meta"]), default="meta", show_default=True)
@click.option("--axiom", "axioms", multiple=True, help="Restrict to these axioms.")
@click.option("--rank-bound", type=click.IntRange(0, None), default=None)
@click.pass_context
@_guard
def axioms(ctx, structure, level, axioms, rank_bound):
    """Bounded set-axiom checks on the inner model."""
    from .extraction import AXIOMS, check_set_axioms, collapse_inner_model

    S = _load(structure)
    im = collapse_inner_model(S, level)
    depth = min(ctx.obj["depth"], 3)
    report = check_set_axioms(im, axioms or AXIOMS, rank_bound=rank_bound, depth=depth)
    stages = [_stage(name, v) for name, v in report.items()]
    stages.append(_stage("finite scale", None, status=HOLDS, result={"never_at_finite_scale": list(report.never_at_finite_scale)}))
    _emit(ctx, "axioms", {"structure": structure, "level": level, "axioms": list(axioms), "rank_bound": rank_bound}, stages)


@main.group()
def newv():
    """The New V structure over hereditarily finite sets."""


@newv.command("verify")
@click.option("--rank", type=click.IntRange(0, RANK_CAP), default=3, show_default=True)
@click.pass_context
@_guard
def newv_verify(ctx, rank):
    """Recover V_rank from the New V structure and check set axioms on it."""
    from .newv import verify_inner_model

    rep = verify_inner_model(rank, depth=min(ctx.obj["depth"], 2))
    data = rep.to_json()
    stages = [_stage("inner model", None, **data)]
    stages += [_stage(name, v) for name, v in rep.axioms.items()]
    _emit(ctx.find_root(), "newv verify", {"rank": rank}, stages)


@newv.command("check")
@click.option("--rank", type=click.IntRange(0, 4), default=4, show_default=True)
@click.pass_context
@_guard
def newv_check(ctx, rank):
    """New V for all concepts with small supports, plus BLV."""
    from .newv import check_newv, newv_structure
    from .structures.schemas import check_schema

    S = newv_structure(ctx.find_root().obj["budget"])
    stages = [_stage("NewV", check_newv(rank)), _stage("BLV", check_schema(S, "blv"))]
    _emit(ctx.find_root(), "newv check", {"rank": rank}, stages)


@newv.command("sample")
@click.option("--pairs", type=click.IntRange(1, 100000), default=200, show_default=True)
@click.pass_context
@_guard
def newv_sample(ctx, pairs):
    """New V on randomly sampled concept pairs (seeded)."""
    from .newv import newv_biconditional, newv_structure

    root = ctx.find_root().obj
    S = newv_structure(root["budget"])
    family, _ = S.domain(1)
    rng = random.Random(root["seed"])
    bad = None
    for _ in range(pairs):
        X, Y = rng.choice(family), rng.choice(family)
        if not newv_biconditional(X, Y):
            bad = [X, Y]
            break
    verdict = Verdict(HOLDS if bad is None else FAILS, "NewV", bad, {"pairs": pairs, "family": len(family)}, flags=("Small: semantic",))
    _emit(ctx.find_root(), "newv sample", {"pairs": pairs}, [_stage("NewV sample", verdict)])


@main.command()
@click.argument("report", type=click.Path(dir_okay=False))
@_guard
def explain(report):
    """Summarise a saved report."""
    try:
        data = json.loads(Path(report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {report}: {exc}") from None
    click.echo(explain_report(data), nl=False)


def explain_report(data: dict) -> str:
    stages = data.get("stages") or []
    lines = [f"{data.get('command', '?')}: {len(stages)} stage(s)"]
    if not stages:
        return "no stages\n"
    notes = set()
    for s in stages:
        lines.append(f"- {s.get('stage')}: {s.get('status')}")
        w = s.get("witness")
        if w not in (None, {}, []):
            if isinstance(w, dict) and "pair" in w:
                lines.append(f"  witness pair: X = {w['pair'][0]}, Y = {w['pair'][1]}")
            elif isinstance(w, dict) and "formula" in w:
                lines.append(f"  witness formula: {w['formula']}")
            else:
                lines.append(f"  witness: {_short(w)}")
        result = s.get("result")
        if isinstance(result, dict) and "collapse" in result:
            for obj, lit in result["collapse"].items():
                lines.append(f"  {obj} -> {lit}")
        for flag in s.get("flags") or []:
            notes.add(flag)
    for note in sorted(notes):
        lines.append(f"flag: {note}")
    return "\n".join(lines) + "\n"


# --- pipelines


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "structure" not in cfg:
        raise ConfigError("config needs a 'structure'")
    pipeline = cfg.get("pipeline")
    if not isinstance(pipeline, list) or not pipeline:
        raise ConfigError("config needs a non-empty 'pipeline' list")
    for i, st in enumerate(pipeline):
        if not isinstance(st, dict) or st.get("op") not in STAGE_OPS:
            raise ConfigError(f"stage {i}: op must be one of {', '.join(STAGE_OPS)}")
    bounds = dict(cfg.get("bounds") or {})
    caps = {"depth": DEPTH_CAP, "rank": RANK_CAP, "budget": BUDGET_CAP}
    for key, value in bounds.items():
        if key not in caps:
            raise ConfigError(f"unknown bound {key!r}")
        if not isinstance(value, int) or not 0 <= value <= caps[key]:
            raise ConfigError(f"bound {key} must be an integer in 0..{caps[key]}")
    return {**cfg, "bounds": bounds}


def run_pipeline(cfg: dict, strict: bool = False) -> tuple[int, list]:
    from .abstraction import AbstractionSpec, build_abstraction, verify_principle
    from .extraction import AXIOMS, check_set_axioms, collapse_inner_model
    from .newv import verify_inner_model
    from .structures.definable import defn_iterate
    from .structures.schemas import check_schema

    cfg = validate_config(cfg)
    bounds = cfg["bounds"]
    depth = bounds.get("depth", 3)
    S = _load(cfg["structure"])
    if S.lazy:
        S = S.with_budget(bounds.get("budget", 64))
    stages = []
    for st in cfg["pipeline"]:
        op = st["op"]
        if op == "build-abstraction":
            specs = [AbstractionSpec(s, arity=st.get("arity", 1)) for s in st.get("specs", ["equality"])]
            base = len(S.ext)
            S = build_abstraction(S, specs, reclose=st.get("reclose", False), verify=False)
            for i, spec in enumerate(specs, start=base + 1):
                stages.append(_stage(f"build-abstraction {i}", verify_principle(S, i, spec)))
        elif op == "check-schema":
            for name in st.get("schemas", []):
                policy = {"depth": depth}
                if "params" in st:
                    policy["params"] = st["params"]
                stages.append(_stage(f"check {name}", check_schema(S, name, **policy)))
        elif op == "extract":
            levels = ["concept", "meta"] if st.get("level", "both") == "both" else [st["level"]]
            for lv in levels:
                s = _extract_stage(S, lv)
                if s.get("flags") is None:
                    s.pop("flags", None)
                stages.append(s)
        elif op == "axioms":
            im = collapse_inner_model(S, st.get("level", "meta"))
            rep = check_set_axioms(im, st.get("axioms", AXIOMS), rank_bound=st.get("rank_bound"), depth=min(depth, 3))
            stages += [_stage(f"axiom {k}", v) for k, v in rep.items()]
        elif op == "verify-inner-model":
            rep = verify_inner_model(st.get("rank", bounds.get("rank", 3)), depth=min(depth, 2))
            stages.append(_stage("verify-inner-model", None, **rep.to_json()))
        elif op == "defn-iterate":
            for lv in defn_iterate([], st.get("levels", 4), params=st.get("params", "all")):
                stages.append(_stage(f"defn level {lv.index}", None, status=HOLDS if lv.equal_to_powerset else FAILS,
                                     result={"size": lv.size, "powerset_size": lv.powerset_size}))
    return _exit_code(stages, strict), stages


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.pass_context
@_guard
def run(ctx, config):
    """Run a JSON experiment config."""
    try:
        cfg = json.loads(Path(config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {config}: {exc}") from None
    cfg = validate_config(cfg)
    out = (cfg.get("output") or {})
    if out.get("format") in ("json", "text"):
        ctx.obj["format"] = out["format"]
    if out.get("path") and not ctx.obj["output"]:
        ctx.obj["output"] = out["path"]
    for key in ("depth", "budget"):
        if key in cfg["bounds"]:
            ctx.obj[key] = cfg["bounds"][key]
    _, stages = run_pipeline(cfg, ctx.obj["strict_unknown"])
    _emit(ctx, "run", cfg, stages)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
