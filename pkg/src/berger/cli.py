"""Command-line front end: validate, run, sweep, replay.

Exit codes: 0 clean, 1 property violation or inadmissible input,
2 usage/parse error. BERGER_SEED overrides the scenario's schedule seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import scenario as scio
from .scenario import SpecError
from .simulator import run, sweep
from .topology import validate_instance

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="berger",
        description="Byzantine-robust geometric routing: validate instances, "
        "run scenarios, replay traces, sweep families.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check an instance file for admissibility")
    p_validate.add_argument("file")

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("file")
    p_run.add_argument("--trace", metavar="F", help="write the event trace to F")
    p_run.add_argument("--json", metavar="F", help="write the outcome document to F")
    p_run.add_argument("--seed", type=int, default=None, help="override the schedule seed")

    p_sweep = sub.add_parser("sweep", help="run a (size x strategy) sweep spec")
    p_sweep.add_argument("file")
    p_sweep.add_argument("--out", metavar="F", help="write the result table to F")
    p_sweep.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; runs are sequential")

    p_replay = sub.add_parser("replay", help="re-execute a trace and verify it bit-identically")
    p_replay.add_argument("file")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    handler = {
        "validate": _cmd_validate,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "replay": _cmd_replay,
    }[args.command]
    try:
        return handler(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _cmd_validate(args) -> int:
    inst = scio.load_instance(args.file)
    report = validate_instance(inst)
    if report.ok():
        print(f"{args.file}: admissible ({len(inst.graph.nodes)} nodes, {len(inst.graph.edges)} edges)")
        return EXIT_OK
    for line in report.lines():
        print(line)
    return EXIT_VIOLATION


def _cmd_run(args) -> int:
    sc = scio.load_scenario(args.file)
    seed = args.seed
    if seed is None and os.environ.get("BERGER_SEED"):
        try:
            seed = int(os.environ["BERGER_SEED"])
        except ValueError:
            print("error: BERGER_SEED must be an integer", file=sys.stderr)
            return EXIT_USAGE
    if seed is not None:
        sc = replace(sc, schedule=replace(sc.schedule, seed=seed))
    if args.trace:
        sc = replace(sc, collect_trace=True)

    report = validate_instance(sc.instance)
    if not report.ok():
        for line in report.lines():
            print(line)
        return EXIT_VIOLATION
    try:
        outcome = run(sc, assume_valid=True)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION

    doc = scio.outcome_to_dict(sc, outcome)
    if args.json:
        Path(args.json).write_text(json.dumps(doc, indent=1) + "\n")
    if args.trace:
        scio.write_trace(sc, outcome, args.trace)
    print(json.dumps(doc))
    return EXIT_OK if not outcome.violations else EXIT_VIOLATION


def _cmd_sweep(args) -> int:
    spec = scio.load_sweep_spec(args.file)
    result = sweep(spec)
    lines = result.table_lines()
    slope = "n/a" if result.slope is None else f"{result.slope:.3f}"
    lines.append(f"# slope={slope} violations={result.violations_total}")
    text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if result.violations_total == 0 else EXIT_VIOLATION


def _cmd_replay(args) -> int:
    sc, recorded = scio.read_trace(args.file)
    report = validate_instance(sc.instance)
    if not report.ok():
        for line in report.lines():
            print(line)
        return EXIT_VIOLATION
    outcome = run(replace(sc, collect_trace=True), assume_valid=True)
    fresh = list(outcome.trace or ())
    for i, (want, got) in enumerate(zip(recorded, fresh), start=1):
        if want != got:
            print(f"divergence at event line {i}:")
            print(f"  recorded: {want}")
            print(f"  replayed: {got}")
            return EXIT_VIOLATION
    if len(recorded) != len(fresh):
        print(f"divergence: recorded {len(recorded)} events, replay produced {len(fresh)}")
        return EXIT_VIOLATION
    print(f"{args.file}: replay matches ({len(fresh)} events)")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
