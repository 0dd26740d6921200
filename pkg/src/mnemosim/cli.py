"""Command-line entry point.

Exit codes: 0 on success, 1 on a validation or domain error (the message on
stderr names the offending field), 2 on a usage error. Only the requested
output goes to stdout; diagnostics go to stderr, with verbosity set by
``MNEMOSIM_LOG``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from mnemosim import engine, influence, temporal
from mnemosim.core import MODIFIERS, SEED_LIMIT, ScenarioConfig, load_scenario
from mnemosim.errors import MnemosimError
from mnemosim.world import World

logger = logging.getLogger("mnemosim")

HELP_WIDTH = 80


class _Formatter(argparse.HelpFormatter):
    def __init__(self, prog):
        super().__init__(prog, width=HELP_WIDTH, max_help_position=28)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < SEED_LIMIT:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _modifiers(text: str) -> tuple[str, ...]:
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in names if m not in MODIFIERS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown modifier(s): {', '.join(unknown)}")
    return names


def _add_common(p: argparse.ArgumentParser, fmt_default: str = "json") -> None:
    p.add_argument("--seed", type=_seed, help="override the scenario seed (u64)")
    p.add_argument("--horizon", type=float, help="override the simulation horizon")
    p.add_argument("--dt", type=float, help="override the trace step")
    p.add_argument("--format", choices=("csv", "json"), default=fmt_default,
                   help=f"output format (default: {fmt_default})")
    p.add_argument("--output", metavar="PATH", help="write output to PATH instead of stdout")
    p.add_argument("--modifiers", type=_modifiers, metavar="LIST",
                   help="comma-separated latency modifiers: " + ",".join(MODIFIERS))
    p.add_argument("--stochastic", action="store_true", help="sample transition times (seeded)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mnemosim", description="Simulate and analyse temporal memory dynamics.", formatter_class=_Formatter
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("simulate", help="run the event engine and emit the event log", formatter_class=_Formatter)
    p.add_argument("scenario", help="scenario JSON file")
    _add_common(p, "csv")
    p.add_argument("--metrics", metavar="PATH", help="also write the metrics bundle (JSON) to PATH")
    p.add_argument("--series", metavar="PATH", help="also write per-dt strength samples (CSV) to PATH")

    p = sub.add_parser("check-temporal", help="evaluate a temporal operator on a trace", formatter_class=_Formatter)
    p.add_argument("trace", help="trace JSON file")
    p.add_argument("--op", required=True, choices=("box", "diamond", "next", "theorem1", "theorem2"),
                   help="operator or theorem to check")
    p.add_argument("--step", type=int, default=0, help="step index for --op next (default: 0)")
    p.add_argument("--output", metavar="PATH", help="write output to PATH instead of stdout")

    p = sub.add_parser("latency", help="resolve a recall latency with its pipeline", formatter_class=_Formatter)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--target", required=True, help="proposition whose latency is resolved")
    p.add_argument("--anchor", help="recalled proposition the latency is relative to")
    _add_common(p)

    p = sub.add_parser("influence", help="path-summed influence between propositions", formatter_class=_Formatter)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--src", required=True, help="source proposition")
    p.add_argument("--dst", required=True, help="destination proposition")
    p.add_argument("--mode", choices=("recursive", "total", "prob"), default="recursive",
                   help="quantity to report (default: recursive)")
    _add_common(p)

    p = sub.add_parser("metrics", help="chain entropy, efficiency and latency", formatter_class=_Formatter)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--chains", action="store_true", help="emit one CSV row per chain")
    _add_common(p, "csv")

    p = sub.add_parser("validate", help="check a scenario and print OK", formatter_class=_Formatter)
    p.add_argument("scenario", help="scenario JSON file")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("MNEMOSIM_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(args) -> ScenarioConfig:
    config = load_scenario(args.scenario)
    config = config.with_overrides(
        seed=getattr(args, "seed", None), horizon=getattr(args, "horizon", None), dt=getattr(args, "dt", None)
    )
    params = config.params
    if getattr(args, "modifiers", None) is not None:
        params = dataclasses.replace(params, modifiers=args.modifiers)
    if getattr(args, "stochastic", False):
        params = dataclasses.replace(params, engine=dataclasses.replace(params.engine, stochastic=True))
    return dataclasses.replace(config, params=params)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_simulate(args) -> str:
    result = engine.run(_load(args))
    if args.metrics:
        Path(args.metrics).write_text(_dump(result.metrics), encoding="utf-8")
    if args.series:
        Path(args.series).write_text(engine.series_to_csv(result.series), encoding="utf-8")
    return result.log_csv() if args.format == "csv" else result.log_jsonl()


def _cmd_check_temporal(args) -> str:
    data = json.loads(Path(args.trace).read_text(encoding="utf-8"))
    doc = temporal.parse_trace_document(data)

    def evaluate(trace: temporal.Trace) -> bool:
        if args.op == "box":
            return temporal.always(trace)
        if args.op == "diamond":
            return temporal.eventually(trace)
        if args.op == "next":
            return temporal.next_(trace, args.step)
        if args.op == "theorem1":
            return temporal.check_box_implies_diamond(trace)
        return temporal.check_next_box_commute(trace)

    if isinstance(doc, temporal.BranchingTrace):
        out = {"op": args.op, "branches": {b: evaluate(doc.branch(b)) for b in doc.branches}}
    else:
        out = {"op": args.op, "result": evaluate(doc)}
    return _dump(out)


def _cmd_latency(args) -> str:
    world = World(_load(args))
    result = world.latency(args.target, args.anchor)
    out = result.to_dict(args.anchor)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("modifier", "value"))
        for s in result.steps:
            w.writerow((s.modifier, engine.fmt(s.value)))
        return buf.getvalue()
    out["T_R"] = engine.jnum(out["T_R"])
    for row in out["pipeline"]:
        for k, v in row.items():
            if isinstance(v, float):
                row[k] = engine.jnum(v)
    return _dump(out)


def _cmd_influence(args) -> str:
    world = World(_load(args))
    world.registry.lookup(args.src)
    world.registry.lookup(args.dst)
    g = world.graph
    cap = world.params.engine.path_cap
    ps = influence.indirect_influence(g, args.src, args.dst, cap)
    if args.mode == "recursive":
        value = influence.recursive_influence(g, args.src, args.dst, cap)
    elif args.mode == "total":
        value = influence.total_influence(g, args.src, args.dst, cap)
    else:
        value = influence.updated_recall_probability(g, args.src, args.dst, cap)
    out = {"src": args.src, "dst": args.dst, "mode": args.mode, "value": engine.jnum(value),
           "paths": ps.paths, "capped": ps.capped}
    if args.format == "csv":
        return "src,dst,mode,value,paths,capped\n" + (
            f"{args.src},{args.dst},{args.mode},{engine.fmt(value)},{ps.paths},{str(ps.capped).lower()}\n"
        )
    return _dump(out)


def _cmd_metrics(args) -> str:
    """CSV rows with --chains (unless --format json); the JSON report otherwise."""
    world = World(_load(args))
    if not world.params.chains:
        raise MnemosimError("params.chains: no chains defined")
    report = world.entropy_latency_report()
    if args.chains and args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("chain_id", "H_bits", "efficiency", "mean_T_R"))
        for r in report.rows:
            w.writerow((r.chain_id, engine.fmt(r.entropy), engine.fmt(r.efficiency), engine.fmt(r.mean_latency)))
        return buf.getvalue()
    d = report.to_dict()
    for row in d["chains"]:
        for k in ("H_bits", "efficiency", "mean_T_R"):
            row[k] = engine.jnum(row[k])
    d["rank_correlation"] = engine.jnum(d["rank_correlation"])
    return _dump(d)


def _cmd_validate(args) -> str:
    World(load_scenario(args.scenario))
    return "OK\n"


COMMANDS = {
    "simulate": _cmd_simulate,
    "check-temporal": _cmd_check_temporal,
    "latency": _cmd_latency,
    "influence": _cmd_influence,
    "metrics": _cmd_metrics,
    "validate": _cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except MnemosimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
