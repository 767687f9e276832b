#!/usr/bin/env python3
"""Compare the two component-folding modes on one source file.

For every function and program point, prints the alias pairs reported by
only one of the modes.  Useful for eyeballing where the finer folding
actually buys precision (and where it costs it).

    python3 scripts/compare_modes.py fixtures/rtrees.pcore
"""

import argparse
import sys

from refshare.analysis import Options, analyze_program
from refshare.components import DomainMode
from refshare.parser import parse_program
from refshare.typecheck import check_types


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("file")
    ap.add_argument("--fn", help="restrict to one function")
    ns = ap.parse_args(argv)

    prog = parse_program(open(ns.file).read())
    check_types(prog)
    old = analyze_program(prog, Options(mode=DomainMode.OLD))
    new = analyze_program(prog, Options(mode=DomainMode.NEW))

    for name in old:
        if ns.fn and name != ns.fn:
            continue
        print(f"== {name} ==")
        for point in sorted(old[name].per_point):
            a, b = old[name].per_point[point], new[name].per_point[point]
            only_old = a.difference(b)
            only_new = b.difference(a)
            if not only_old and not only_new:
                continue
            print(f"  point {point}:")
            for p, q in sorted(only_old):
                print(f"    old only: {{{p}, {q}}}")
            for p, q in sorted(only_new):
                print(f"    new only: {{{p}, {q}}}")
        do = [str(d) for d in old[name].diagnostics]
        dn = [str(d) for d in new[name].diagnostics]
        if do != dn:
            print(f"  diagnostics old: {do or 'none'}")
            print(f"  diagnostics new: {dn or 'none'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
