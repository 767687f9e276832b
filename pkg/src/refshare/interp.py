"""Concrete heap interpreter used as a ground-truth oracle.

Programs are executed against an explicit heap of addressed words.  At
every program point the interpreter snapshots the local environment and
heap; ``footprint`` maps each variable component to the set of heap
addresses it covers, ``concrete_sharing`` turns intersecting footprints
into alias pairs, and ``soundness_check`` verifies that the concrete
pairs at each executed point are contained in the analysis result for
that point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .aliasset import AliasSet, VarComp, mk_pair
from .components import ARRAY, CL, Universe
from .syntax import (
    App, ArrayRef, ArrayT, Assign, Bind, Case, ConsArg, DerefEq, EqDeref,
    EqVar, ErrorStmt, FnT, FuncDef, Instype, IntArg, Named, Program, RefT,
    RESULT_VAR, VarArg,
)
from .typecheck import BUILTIN_FUNCS


class RunError(Exception):
    pass


class StepLimitExceeded(RunError):
    pass


class PatternFailure(RunError):
    pass


# -- values -------------------------------------------------------------------

@dataclass(frozen=True)
class IntV:
    value: int


@dataclass(frozen=True)
class ConstV:
    cons: str


@dataclass(frozen=True)
class BlockV:
    cons: str
    addrs: tuple  # one heap word per constructor argument


@dataclass(frozen=True)
class ArrayV:
    addrs: tuple


@dataclass(frozen=True)
class RefV:
    addr: int


@dataclass(frozen=True)
class ClosV:
    fn: str
    addrs: tuple  # supplied-argument words, most recent first


Value = object


@dataclass
class TracePoint:
    label: str           # e.g. "list_bst:3"
    fn: str
    env: dict            # var -> Value (snapshot)
    heap: dict           # addr -> Value (snapshot)


@dataclass
class RunResult:
    status: str          # "ok" | "error" | "step-limit"
    value: Optional[Value]
    trace: list          # of TracePoint
    steps: int


class Machine:
    def __init__(self, program: Program, step_limit: int = 10 ** 6):
        self.program = program
        self.heap: dict = {}
        self.next_addr = 1
        self.steps = 0
        self.step_limit = step_limit
        self.trace: list = []

    def alloc(self, value: Value) -> int:
        a = self.next_addr
        self.next_addr += 1
        self.heap[a] = value
        return a

    def tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise StepLimitExceeded(f"step limit {self.step_limit} exceeded")

    def snapshot(self, fn: str, point: int, env: dict):
        self.trace.append(TracePoint(f"{fn}:{point}", fn, dict(env),
                                     dict(self.heap)))

    # -- execution ---------------------------------------------------------------
    def arg_value(self, env: dict, a) -> Value:
        if isinstance(a, IntArg):
            return IntV(a.value)
        if isinstance(a, VarArg):
            return env[a.name]
        return ConstV(a.name)

    def call(self, fname: str, args: list) -> Value:
        fd = self.program.funcs.get(fname)
        if fd is None:
            raise RunError(f"unknown function {fname!r}")
        if len(args) != len(fd.params):
            raise RunError(f"{fname} expects {len(fd.params)} argument(s)")
        env = {n: v for ((n, _t, _m), v) in zip(fd.params, args)}
        self.snapshot(fname, 0, env)
        self.exec_block(fd, env, fd.body)
        if RESULT_VAR not in env:
            raise RunError(f"{fname} finished without binding {RESULT_VAR}")
        return env[RESULT_VAR]

    def exec_block(self, fd: FuncDef, env: dict, body: list):
        for s in body:
            self.exec_stmt(fd, env, s)

    def exec_stmt(self, fd: FuncDef, env: dict, s):
        self.tick()
        if isinstance(s, EqVar):
            env[s.var] = env[s.src]
        elif isinstance(s, EqDeref):
            env[s.var] = self.heap[env[s.src].addr]
        elif isinstance(s, DerefEq):
            env[s.var] = RefV(self.alloc(self.arg_value(env, s.src)))
        elif isinstance(s, Bind):
            if s.cons is None:
                env[s.var] = IntV(s.value)
            elif not s.args:
                env[s.var] = ConstV(s.cons)
            else:
                addrs = tuple(self.alloc(self.arg_value(env, a))
                              for a in s.args)
                env[s.var] = BlockV(s.cons, addrs)
        elif isinstance(s, Assign):
            self.heap[env[s.var].addr] = self.arg_value(env, s.src)
        elif isinstance(s, App):
            env[s.var] = self.apply(env, s)
        elif isinstance(s, ArrayRef):
            arr = env[s.arr]
            idx = self.arg_value(env, s.idx)
            if not isinstance(arr, ArrayV) or not isinstance(idx, IntV):
                raise RunError("arrayref expects an array and an index")
            if not 0 <= idx.value < len(arr.addrs):
                raise PatternFailure("array index out of bounds")
            env[s.var] = RefV(arr.addrs[idx.value])
        elif isinstance(s, Instype):
            env[s.var] = env[s.src]
        elif isinstance(s, Case):
            self.exec_case(fd, env, s)
            return
        elif isinstance(s, ErrorStmt):
            self.snapshot(fd.name, s.point, env)
            raise PatternFailure(f"{fd.name}:{s.point}: error")
        else:
            raise RunError(f"cannot execute {s!r}")
        self.snapshot(fd.name, s.point, env)

    def exec_case(self, fd: FuncDef, env: dict, s: Case):
        v = env[s.var]
        cons = v.cons if isinstance(v, (ConstV, BlockV)) else None
        if cons is None:
            raise RunError(f"case on non-constructor value {v!r}")
        for alt in s.alts:
            if alt.pat.cons != cons:
                continue
            addrs = v.addrs if isinstance(v, BlockV) else ()
            if len(alt.pat.refvars) != len(addrs):
                raise RunError("pattern arity mismatch")
            for rv, addr in zip(alt.pat.refvars, addrs):
                env[rv] = RefV(addr)
            self.snapshot(fd.name, alt.entry_point, env)
            self.exec_block(fd, env, alt.body)
            self.snapshot(fd.name, s.end_point, env)
            return
        raise PatternFailure(f"no case alternative matches {cons}")

    def apply(self, env: dict, s: App) -> Value:
        args = [self.arg_value(env, a) for a in s.args]
        if s.fn in env:
            fv = env[s.fn]
            if not isinstance(fv, ClosV):
                raise RunError(f"{s.fn!r} is not callable")
            fn, prior = fv.fn, fv.addrs
        elif s.fn in BUILTIN_FUNCS:
            return self.builtin(s.fn, args)
        elif s.fn in self.program.funcs:
            fn, prior = s.fn, ()
        else:
            raise RunError(f"unknown function {s.fn!r}")
        arity = (len(BUILTIN_FUNCS[fn].params) if fn in BUILTIN_FUNCS
                 else len(self.program.funcs[fn].params))
        supplied = len(prior) + len(args)
        if supplied < arity:
            new = tuple(self.alloc(v) for v in args)
            return ClosV(fn, tuple(reversed(new)) + prior)
        if supplied > arity:
            raise RunError(f"too many arguments for {fn!r}")
        closed = [self.heap[a] for a in reversed(prior)]
        full = closed + args
        if fn in BUILTIN_FUNCS:
            return self.builtin(fn, full)
        return self.call(fn, full)

    def builtin(self, name: str, args: list) -> Value:
        if name == "le":
            a, b = args
            return ConstV("True" if a.value <= b.value else "False")
        raise RunError(f"unknown builtin {name!r}")


def run(program: Program, entry: str, arg_texts: list = (),
        step_limit: int = 10 ** 6) -> RunResult:
    """Execute ``entry`` with arguments given as literal terms, e.g.
    ``Cons 1 (Cons 2 Nil)`` or ``Ref TNil``."""
    m = Machine(program, step_limit)
    try:
        args = [build_literal(m, t) for t in arg_texts]
        value = m.call(entry, args)
        return RunResult("ok", value, m.trace, m.steps)
    except StepLimitExceeded:
        return RunResult("step-limit", None, m.trace, m.steps)
    except PatternFailure:
        return RunResult("error", None, m.trace, m.steps)


def show_value(heap: dict, value: Value, depth: int = 50) -> str:
    """Render a value as a literal term (cycles are cut off with '...')."""
    if depth <= 0:
        return "..."
    if isinstance(value, IntV):
        return str(value.value)
    if isinstance(value, ConstV):
        return value.cons
    if isinstance(value, RefV):
        inner = show_value(heap, heap[value.addr], depth - 1)
        return f"(Ref {inner})"
    if isinstance(value, ArrayV):
        body = " ".join(show_value(heap, heap[a], depth - 1)
                        for a in value.addrs)
        return f"(Array {body})".replace("(Array )", "(Array)")
    if isinstance(value, ClosV):
        return f"<closure {value.fn}/{len(value.addrs)}>"
    if not value.addrs:
        return value.cons
    body = " ".join(show_value(heap, heap[a], depth - 1)
                    for a in value.addrs)
    return f"({value.cons} {body})"


_LIT_TOKEN = re.compile(r"\(|\)|-?\d+|[A-Za-z_][A-Za-z0-9_']*")


def build_literal(m: Machine, text: str) -> Value:
    toks = _LIT_TOKEN.findall(text.replace("()", " Unit_ "))
    pos = [0]

    def atom() -> Value:
        t = toks[pos[0]]
        pos[0] += 1
        if t == "(":
            v = term()
            if toks[pos[0]] != ")":
                raise RunError(f"bad literal {text!r}")
            pos[0] += 1
            return v
        if re.fullmatch(r"-?\d+", t):
            return IntV(int(t))
        if t == "Unit_":
            return ConstV("()")
        return ConstV(t)

    def term() -> Value:
        head = toks[pos[0]]
        if head in ("(",) or re.fullmatch(r"-?\d+", head):
            return atom()
        pos[0] += 1
        if head == "Unit_":
            return ConstV("()")
        args = []
        while pos[0] < len(toks) and toks[pos[0]] != ")":
            args.append(atom())
        if not args:
            return ConstV(head)
        if head == "Ref":
            if len(args) != 1:
                raise RunError("Ref literal takes one argument")
            return RefV(m.alloc(args[0]))
        if head == "Array":
            return ArrayV(tuple(m.alloc(a) for a in args))
        return BlockV(head, tuple(m.alloc(a) for a in args))

    v = term()
    if pos[0] != len(toks):
        raise RunError(f"trailing junk in literal {text!r}")
    return v


# -- footprints and concrete sharing ---------------------------------------------

def footprint(universe: Universe, program: Program, heap: dict,
              value: Value, t) -> dict:
    """Map each component of ``value`` (of type ``t``) to the set of heap
    addresses belonging to it.  Handles cyclic structures."""
    out: dict = {}
    seen: set = set()

    def walk(val: Value, path, types):
        if isinstance(val, RefV):
            steps = [(("Ref", 1), val.addr)]
        elif isinstance(val, BlockV):
            steps = [((val.cons, i + 1), a)
                     for i, a in enumerate(val.addrs)]
        elif isinstance(val, ArrayV):
            steps = [((ARRAY, 1), a) for a in val.addrs]
        elif isinstance(val, ClosV):
            steps = [((CL, i + 1), a) for i, a in enumerate(val.addrs)]
        else:
            return
        for (dc, i), addr in steps:
            try:
                p2, t2 = universe.fold_step(path, types, dc, i)
            except Exception:
                continue
            out.setdefault(p2, set()).add(addr)
            key = (addr, p2)
            if key in seen:
                continue
            seen.add(key)
            walk(heap[addr], p2, t2)

    walk(value, (), (t,))
    return out


def closure_value_type(program: Program, val: ClosV):
    """Reconstruct the FnT of a closure value from its function's type."""
    from .typecheck import fn_type
    fd = program.funcs.get(val.fn) or BUILTIN_FUNCS.get(val.fn)
    ft = fn_type(fd)
    k = len(val.addrs)
    closed = tuple(reversed(ft.args[:k]))
    return FnT(ft.args[k:], ft.result, ft.sig, closed)


def concrete_sharing(universe: Universe, program: Program, tp: TracePoint,
                     var_types: dict) -> AliasSet:
    """Alias pairs that actually hold in a trace snapshot."""
    foots = {}
    for var, val in tp.env.items():
        t = var_types.get(var)
        if isinstance(val, ClosV):
            t = closure_value_type(program, val)
        if t is None:
            continue
        foots[var] = footprint(universe, program, tp.heap, val, t)
    pairs: set = set()
    items = sorted(foots.items())
    for vi, (x, fx) in enumerate(items):
        for y, fy in items[vi:]:
            for c1, a1 in fx.items():
                for c2, a2 in fy.items():
                    if x == y and c2 < c1:
                        continue
                    if a1 & a2:
                        pairs.add(mk_pair(VarComp(x, c1), VarComp(y, c2)))
    return AliasSet(pairs)


@dataclass
class SoundnessViolation:
    label: str
    pair: tuple

    def __str__(self) -> str:
        p, q = self.pair
        return f"{self.label}: concrete pair {{{p}, {q}}} not in analysis"


def soundness_check(program: Program, universe: Universe, result: RunResult,
                    per_point_by_label: dict) -> list:
    """Check every executed program point: concrete sharing must be
    covered by the analysis alias set at that point."""
    violations = []
    for tp in result.trace:
        fd = program.funcs[tp.fn]
        abstract_free = per_point_by_label.get(tp.label)
        if abstract_free is None:
            continue
        cs = concrete_sharing(universe, program, tp, fd.var_types)
        for pair in cs:
            if pair not in abstract_free:
                violations.append(SoundnessViolation(tp.label, pair))
    return violations
