"""Command line interface.

Exit codes: 0 = clean, 1 = diagnostics or soundness violations reported,
2 = parse or type error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import Options, analyze_program
from .components import DomainMode, Universe
from .interp import RunError, run, show_value, soundness_check
from .parser import ParseError, parse_program
from .typecheck import TypeErr, check_types


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("file", help="source file (.pcore)")
    p.add_argument("--mode", choices=("old", "new"), default="new",
                   help="component folding mode (default: new)")
    p.add_argument("--precise-app", action="store_true",
                   help="suppress closure sharing for saturated "
                        "calls to statically known functions")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="refshare",
        description="Sharing and alias analysis for a small language "
                    "with mutable references.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the static analysis")
    _add_common(a)
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--dump-points", action="store_true",
                   help="print the alias set at every program point")

    r = sub.add_parser("run", help="execute a function concretely")
    r.add_argument("file")
    r.add_argument("--entry", required=True, help="function to call")
    r.add_argument("--args", default="", help="comma-separated literal "
                   "arguments, e.g. 'ICons 1 INil, 7'")
    r.add_argument("--step-limit", type=int, default=10 ** 6)
    r.add_argument("--format", choices=("text", "json"), default="text")

    c = sub.add_parser("check-soundness",
                       help="compare a concrete run against the analysis")
    _add_common(c)
    c.add_argument("--entry", required=True)
    c.add_argument("--args", default="")
    c.add_argument("--step-limit", type=int, default=10 ** 6)
    c.add_argument("--format", choices=("text", "json"), default="text")
    return ap


def _load(path: str):
    with open(path) as f:
        text = f.read()
    program = parse_program(text)
    check_types(program)
    return program


def _split_args(text: str) -> list:
    return [a.strip() for a in text.split(",") if a.strip()]


def _options(ns) -> Options:
    mode = DomainMode.OLD if ns.mode == "old" else DomainMode.NEW
    return Options(mode=mode, precise_app=ns.precise_app)


def cmd_analyze(ns) -> int:
    program = _load(ns.file)
    results = analyze_program(program, _options(ns))
    bad = False
    if ns.format == "json":
        doc = {}
        for name, res in results.items():
            entry = {
                "final": res.final.to_json(),
                "diagnostics": [
                    {"kind": d.kind, "point": d.point, "message": d.message}
                    for d in res.diagnostics],
            }
            if ns.dump_points:
                entry["points"] = {str(p): a.to_json()
                                   for p, a in sorted(res.per_point.items())}
            doc[name] = entry
            bad = bad or not res.ok
        print(json.dumps(doc, indent=2))
    else:
        for name, res in results.items():
            print(f"== {name} ==")
            if ns.dump_points:
                for p, a in sorted(res.per_point.items()):
                    print(f"  point {p}: {a.text()}")
            print(f"  final: {res.final.text()}")
            for d in res.diagnostics:
                print(f"  {d.kind} at {d.point}: {d.message}")
                bad = True
    return 1 if bad else 0


def cmd_run(ns) -> int:
    program = _load(ns.file)
    if ns.entry not in program.funcs:
        raise TypeErr(f"no function named {ns.entry!r}")
    result = run(program, ns.entry, _split_args(ns.args), ns.step_limit)
    heap = result.trace[-1].heap if result.trace else {}
    shown = (show_value(heap, result.value)
             if result.value is not None else None)
    if ns.format == "json":
        print(json.dumps({"status": result.status, "value": shown,
                          "steps": result.steps}))
    else:
        print(f"status: {result.status}")
        if shown is not None:
            print(f"value: {shown}")
        print(f"steps: {result.steps}")
    return 0 if result.status == "ok" else 1


def cmd_check_soundness(ns) -> int:
    program = _load(ns.file)
    if ns.entry not in program.funcs:
        raise TypeErr(f"no function named {ns.entry!r}")
    options = _options(ns)
    results = analyze_program(program, options)
    per_label = {}
    for res in results.values():
        per_label.update(res.labelled_points())
    result = run(program, ns.entry, _split_args(ns.args), ns.step_limit)
    universe = Universe(program, options.mode)
    violations = soundness_check(program, universe, result, per_label)
    if ns.format == "json":
        print(json.dumps({
            "status": result.status,
            "points_checked": len(result.trace),
            "violations": [str(v) for v in violations]}))
    else:
        print(f"run status: {result.status}")
        print(f"points checked: {len(result.trace)}")
        if violations:
            for v in violations:
                print(f"VIOLATION {v}")
        else:
            print("no violations")
    return 1 if violations else 0


def main(argv=None) -> int:
    ns = build_arg_parser().parse_args(argv)
    handlers = {"analyze": cmd_analyze, "run": cmd_run,
                "check-soundness": cmd_check_soundness}
    try:
        return handlers[ns.command](ns)
    except (ParseError, TypeErr, RunError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
