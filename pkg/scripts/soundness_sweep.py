#!/usr/bin/env python3
"""Differential soundness sweep.

Generates random core programs, runs each under the reference
interpreter, and checks that every concrete alias pair observed at every
executed program point is covered by the static analysis, in both
component-folding modes.

    python3 scripts/soundness_sweep.py --seeds 500
"""

import argparse
import sys
import time

from refshare.analysis import Options, analyze_program
from refshare.components import DomainMode, Universe
from refshare.interp import run, soundness_check
from refshare.randprog import generate_program, generate_source


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=500,
                    help="number of random programs (default 500)")
    ap.add_argument("--start", type=int, default=0, help="first seed")
    ap.add_argument("--max-stmts", type=int, default=12)
    ap.add_argument("--show-failures", action="store_true",
                    help="print the source of any failing program")
    ns = ap.parse_args(argv)

    t0 = time.time()
    points = 0
    failures = 0
    for seed in range(ns.start, ns.start + ns.seeds):
        prog = generate_program(seed, max_stmts=ns.max_stmts)
        result = run(prog, "main", [])
        if result.status != "ok":
            print(f"seed {seed}: run status {result.status}")
            failures += 1
            continue
        for mode in DomainMode:
            per_label = {}
            for res in analyze_program(prog, Options(mode=mode)).values():
                per_label.update(res.labelled_points())
            violations = soundness_check(prog, Universe(prog, mode),
                                         result, per_label)
            points += len(result.trace)
            if violations:
                failures += 1
                print(f"seed {seed} [{mode.name}]: "
                      f"{len(violations)} violation(s)")
                for v in violations[:5]:
                    print(f"  {v}")
                if ns.show_failures:
                    print(generate_source(seed, max_stmts=ns.max_stmts))
    dt = time.time() - t0
    print(f"{ns.seeds} programs, {points} point checks, "
          f"{failures} failure(s), {dt:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
