"""Random well-typed program generator for differential testing of the
analysis against the concrete interpreter."""

from __future__ import annotations

import random

from .parser import parse_program
from .syntax import Program
from .typecheck import check_types

HEADER = """\
data Ints = INil | ICons Int Ints
data Tree = TLeaf | TNode Tree Int Tree
data Pair_ = MkPair Ints Ints
"""

_TYPES = ("Ints", "Tree", "Pair_", "Int", "RefInts", "RefTree")


class _Gen:
    def __init__(self, rng: random.Random, max_stmts: int):
        self.rng = rng
        self.budget = max_stmts
        self.counter = 0
        self.lines: list = []

    def fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def emit(self, depth: int, line: str):
        self.lines.append("  " * (depth + 1) + line)
        self.budget -= 1

    def vars_of(self, scope: dict, ty: str) -> list:
        return sorted(v for v, t in scope.items() if t == ty)

    def gen_value(self, scope: dict, depth: int, ty: str) -> str:
        """Ensure a variable of type ``ty`` exists in scope; returns it."""
        existing = self.vars_of(scope, ty)
        if existing and (self.budget <= 1 or self.rng.random() < 0.5):
            return self.rng.choice(existing)
        v = self.fresh()
        r = self.rng
        if ty == "Int":
            self.emit(depth, f"{v} = {r.randrange(10)}")
        elif ty == "Ints":
            if existing and r.random() < 0.6:
                tail = r.choice(existing)
                n = self.gen_value(scope, depth, "Int")
                self.emit(depth, f"{v} = ICons {n} {tail}")
            else:
                self.emit(depth, f"{v} = INil")
        elif ty == "Tree":
            if existing and r.random() < 0.6:
                left = r.choice(existing)
                right = r.choice(existing)
                n = self.gen_value(scope, depth, "Int")
                self.emit(depth, f"{v} = TNode {left} {n} {right}")
            else:
                self.emit(depth, f"{v} = TLeaf")
        elif ty == "Pair_":
            a = self.gen_value(scope, depth, "Ints")
            b = self.gen_value(scope, depth, "Ints")
            self.emit(depth, f"{v} = MkPair {a} {b}")
        elif ty == "RefInts":
            w = self.gen_value(scope, depth, "Ints")
            self.emit(depth, f"*{v} = {w}")
        elif ty == "RefTree":
            w = self.gen_value(scope, depth, "Tree")
            self.emit(depth, f"*{v} = {w}")
        scope[v] = ty
        return v

    def gen_stmt(self, scope: dict, depth: int):
        r = self.rng
        choice = r.random()
        if choice < 0.35:
            ty = r.choice(_TYPES)
            self.gen_value(scope, depth, ty)
        elif choice < 0.5:
            # copy an existing variable
            if scope:
                w = r.choice(sorted(scope))
                v = self.fresh()
                self.emit(depth, f"{v} = {w}")
                scope[v] = scope[w]
        elif choice < 0.65:
            # dereference
            refs = self.vars_of(scope, "RefInts") + self.vars_of(
                scope, "RefTree")
            if refs:
                w = r.choice(refs)
                v = self.fresh()
                self.emit(depth, f"{v} = *{w}")
                scope[v] = scope[w][3:]
        elif choice < 0.82:
            # destructive update (annotate everything in scope; the
            # oracle only checks alias sets, not diagnostics)
            for rty, vty in (("RefInts", "Ints"), ("RefTree", "Tree")):
                refs = self.vars_of(scope, rty)
                if refs and r.random() < 0.8:
                    tgt = r.choice(refs)
                    src = self.gen_value(scope, depth, vty)
                    bangs = "".join(
                        "!" + x for x in sorted(scope) if x != tgt)
                    self.emit(depth, f"*!{tgt} := {src} {bangs}".rstrip())
                    break
        else:
            self.gen_case(scope, depth)

    def gen_case(self, scope: dict, depth: int):
        if depth >= 2 or self.budget < 4:
            return
        r = self.rng
        ty = r.choice(("Ints", "Tree", "Pair_"))
        scrut = self.gen_value(scope, depth, ty)
        self.lines.append("  " * (depth + 1) + f"case {scrut} {{")
        alts = {
            "Ints": [("INil", []), ("ICons", ["Int", "Ints"])],
            "Tree": [("TLeaf", []), ("TNode", ["Tree", "Int", "Tree"])],
            "Pair_": [("MkPair", ["Ints", "Ints"])],
        }[ty]
        for cons, argtys in alts:
            pvars = [self.fresh() for _ in argtys]
            head = " ".join([cons] + ["*" + v for v in pvars])
            self.lines.append("  " * (depth + 2) + head + " -> {")
            inner = dict(scope)
            for v, at in zip(pvars, argtys):
                if at != "Int":  # Ref Int pattern vars stay unused
                    inner[v] = "Ref" + at
            n = r.randrange(1, 3)
            for _ in range(n):
                if self.budget > 0:
                    self.gen_stmt(inner, depth + 2)
            self.lines.append("  " * (depth + 2) + "}")
        self.lines.append("  " * (depth + 1) + "}")


def generate_source(seed: int, max_stmts: int = 12) -> str:
    """A self-contained random program with a parameterless entry ``main``."""
    rng = random.Random(seed)
    g = _Gen(rng, max_stmts)
    n = rng.randrange(3, max_stmts + 1)
    scope: dict = {}
    while g.budget > 0 and n > 0:
        g.gen_stmt(scope, 0)
        n -= 1
    g.lines.append("  ret = ()")
    body = "\n".join(g.lines)
    return (HEADER +
            "\nfn main () -> ()\n  pre nosharing\n  post nosharing\n{\n" +
            body + "\n}\n")


def generate_program(seed: int, max_stmts: int = 12) -> Program:
    prog = parse_program(generate_source(seed, max_stmts))
    check_types(prog)
    return prog
