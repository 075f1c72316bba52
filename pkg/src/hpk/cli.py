"""``hpk`` command line.

Exit status 0 means success (or: no counterexample / no difference found),
1 means a counterexample or a difference was found, and 2 flags bad usage or
bad input. Results go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import re
import sys
from pathlib import Path

from . import corpus
from .diff import diff_trees, format_diff
from .errors import (
    ContinuousPresent, HpkError, KindMismatch, NotWellStructured, ParseError, PlaceholderExecuted,
    UnknownName,
)
from .graph import ActivityGraph
from .parser import parse_activity_graph, parse_model
from .printer import format_number, pretty_print
from .simulate import (
    SimPolicy, check_safety, describe, enumerate_reachable_discrete, initial_states, simulate_run,
)
from .transform import to_automaton_embedding, to_hybrid_program

OK, FOUND, USAGE = 0, 1, 2


class _InputError(Exception):
    """Bad input; the message is printed to stderr and the exit status is 2."""


def _parse_text(text: str, origin: str):
    first = re.match(r"(?:\s|//[^\n]*)*(\w+)", text)
    parse = parse_activity_graph if first and first.group(1) == "graph" else parse_model
    try:
        return parse(text)
    except ParseError as exc:
        raise _InputError(f"{origin}:{exc}") from None


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror or exc}") from None
    return _parse_text(text, path)


def _load_graph(path: str) -> ActivityGraph:
    g = _load(path)
    if not isinstance(g, ActivityGraph):
        raise _InputError(f"{path}: expected an activity graph, found a model")
    return g


def _load_model(path: str):
    m = _load(path)
    if isinstance(m, ActivityGraph):
        raise _InputError(f"{path}: expected a model, found an activity graph "
                          "(run 'hpk transform' or 'hpk embed' first)")
    return m


def _emit(text: str, out_path):
    if not text.endswith("\n"):
        text += "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _policy(args) -> SimPolicy:
    fields = {f.name: f for f in dataclasses.fields(SimPolicy)}
    overrides = {}
    for item in args.policy or []:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in fields:
            raise _InputError(f"bad --policy {item!r}; known keys: {', '.join(fields)}")
        if key == "assign_any_range":
            parts = re.split(r"[,:]", value)
            if len(parts) != 2:
                raise _InputError("assign_any_range takes LO,HI")
            overrides[key] = tuple(parts)
        else:
            overrides[key] = value
    overrides["seed"] = args.seed
    try:
        return SimPolicy(**{k: _number(v) for k, v in overrides.items()})
    except (TypeError, ValueError) as exc:
        raise _InputError(f"invalid policy: {exc}") from None


def _number(v):
    if isinstance(v, tuple):
        return tuple(float(x) for x in v)
    if isinstance(v, str):
        return float(v) if re.search(r"[.eE]", v) else int(v)
    return v


def _default_seed() -> int:
    raw = os.environ.get("HPK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise _InputError(f"HPK_SEED must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- commands


def cmd_fmt(args):
    _emit(pretty_print(_load(args.file)), None)
    return OK


def _structured(path):
    g = _load_graph(path)
    try:
        return to_hybrid_program(g)
    except NotWellStructured as exc:
        lines = [f"{path}: graph is not well-structured"]
        lines += [f"  {where}: {why}" for where, why in exc.report.violations]
        raise _InputError("\n".join(lines)) from None


def cmd_transform(args):
    _emit(pretty_print(_structured(args.graph)), args.output)
    return OK


def cmd_embed(args):
    _emit(pretty_print(to_automaton_embedding(_load_graph(args.graph))), args.output)
    return OK


def cmd_simulate(args):
    m = _load_model(args.model)
    policy = _policy(args)
    code = OK
    try:
        trace = simulate_run(m, policy, box=corpus.box_for(m.name))
    except PlaceholderExecuted as exc:
        print(f"placeholder {exc.label!r} reached; trace is partial", file=sys.stderr)
        trace, code = exc.trace, FOUND
    _emit(trace.to_csv(), args.out)
    return code


def cmd_check(args):
    m = _load_model(args.model)
    policy = _policy(args)
    if args.runs < 1:
        raise _InputError("--runs must be positive")
    result = check_safety(m, args.runs, policy, box=corpus.box_for(m.name))
    print(describe(result))
    if result.verdict == "counterexample":
        if args.csv_counterexample:
            Path(args.csv_counterexample).write_text(result.trace.to_csv())
        return FOUND
    return OK


def cmd_reach(args):
    m = _load_model(args.model)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise _InputError(f"--values must be comma-separated numbers: {args.values!r}") from None
    try:
        states = enumerate_reachable_discrete(m.program, initial_states(m, values), values,
                                              args.depth)
    except ContinuousPresent:
        raise _InputError(f"{args.model}: reach needs a program without ODEs") from None
    order = {name: i for i, name in enumerate(m.symbols)}
    rows = sorted(
        tuple(sorted(s, key=lambda kv: order.get(kv[0], len(order)))) for s in states
    )
    for row in rows:
        print(" ".join(f"{k}={format_number(v)}" for k, v in row))
    print(f"{len(rows)} reachable states", file=sys.stderr)
    return OK


def cmd_diff(args):
    a, b = _load(args.a), _load(args.b)
    try:
        entries = diff_trees(a, b)
    except KindMismatch as exc:
        raise _InputError(str(exc)) from None
    sys.stdout.write(format_diff(entries, args.format))
    return FOUND if entries else OK


def cmd_corpus(args):
    if args.action == "list":
        for name in corpus.list_models():
            print(f"{name}\t{corpus.get_model(name).description}")
        return OK
    if args.action == "show":
        if not args.name:
            raise _InputError("corpus show needs a NAME")
        try:
            sys.stdout.write(corpus.model_text(args.name))
        except UnknownName:
            raise _InputError(f"unknown corpus entry {args.name!r}") from None
        return OK
    if not args.name:
        raise _InputError("corpus export needs a target directory")
    target = Path(args.name)
    target.mkdir(parents=True, exist_ok=True)
    for name in corpus.list_models():
        entry = corpus.get_model(name)
        (target / entry.filename).write_text(pretty_print(entry.model))
        print(target / entry.filename)
    return OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="hpk", description="hybrid programs and activity graphs")
    sub = top.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fmt", help="parse a model or graph and print it canonically")
    p.add_argument("file")
    p.set_defaults(func=cmd_fmt)

    for name, func, text in (("transform", cmd_transform, "structured transformation"),
                             ("embed", cmd_embed, "automaton embedding")):
        p = sub.add_parser(name, help=f"activity graph to model ({text})")
        p.add_argument("graph")
        p.add_argument("-o", "--output", help="write the model here instead of stdout")
        p.set_defaults(func=func)

    def seeded(p):
        p.add_argument("--seed", type=int, default=None,
                       help="random seed (default: $HPK_SEED or 0)")
        p.add_argument("--policy", action="append", metavar="KEY=VALUE",
                       help="override a simulation policy field; may repeat")

    p = sub.add_parser("simulate", help="one random run, written as CSV")
    p.add_argument("model")
    seeded(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="search random runs for a safety violation")
    p.add_argument("model")
    p.add_argument("--runs", type=int, default=1000)
    seeded(p)
    p.add_argument("--csv-counterexample", metavar="PATH",
                   help="write the violating trace here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reach", help="enumerate reachable states of a discrete model")
    p.add_argument("model")
    p.add_argument("--values", default="0,1,2", help="finite value domain, e.g. 0,1,2")
    p.add_argument("--depth", type=int, default=5, help="loop iteration bound")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("diff", help="structural difference of two models or graphs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--format", choices=("text", "tsv"), default="text")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("corpus", help="bundled example models")
    p.add_argument("action", choices=("list", "show", "export"))
    p.add_argument("name", nargs="?", help="entry name (show) or directory (export)")
    p.set_defaults(func=cmd_corpus)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except _InputError as exc:
        print(f"hpk: {exc}", file=sys.stderr)
        return USAGE
    except HpkError as exc:
        print(f"hpk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
