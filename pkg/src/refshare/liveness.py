"""Backward may-use liveness, per program point.

``compute_liveness`` returns, for every program point of a function
body, the set of variables live *after* that point (parameters are
considered live throughout).  Point 0 is the function entry; its entry
in the result is the set of variables live before the first statement.
"""

from __future__ import annotations

from .syntax import (
    App, ArrayRef, Assign, Bind, Case, DerefEq, EqDeref, EqVar, ErrorStmt,
    FuncDef, Instype, RESULT_VAR, VarArg,
)


def uses(s) -> set:
    if isinstance(s, (EqVar, EqDeref, Instype)):
        return {s.src}
    if isinstance(s, (DerefEq,)):
        return _arg_vars([s.src])
    if isinstance(s, Bind):
        return _arg_vars(s.args)
    if isinstance(s, Assign):
        return {s.var} | _arg_vars([s.src])
    if isinstance(s, App):
        out = _arg_vars(s.args)
        out.add(s.fn)  # harmless when fn is a global function name
        return out
    if isinstance(s, ArrayRef):
        return {s.arr} | _arg_vars([s.idx])
    if isinstance(s, Case):
        return {s.var}
    return set()


def defs(s) -> set:
    if isinstance(s, (EqVar, EqDeref, DerefEq, Bind, App, ArrayRef, Instype)):
        return {s.var}
    return set()


def _arg_vars(args) -> set:
    return {a.name for a in args if isinstance(a, VarArg)}


def compute_liveness(fd: FuncDef) -> dict:
    """Map point number -> frozenset of live-after variables."""
    params = {n for (n, _t, _m) in fd.params}
    live_after: dict = {}

    def go(body, out: set) -> set:
        """Return live-before the block given live-after it."""
        live = set(out)
        for s in reversed(body):
            if isinstance(s, Case):
                live_after[s.end_point] = frozenset(live | params)
                before_branches = set()
                for alt in s.alts:
                    b = go(alt.body, live)
                    live_after[alt.entry_point] = frozenset(b | params)
                    before_branches |= b - set(alt.pat.refvars)
                live = before_branches | {s.var}
            else:
                live_after[s.point] = frozenset(live | params)
                live = (live - defs(s)) | uses(s)
        return live

    out0 = {RESULT_VAR}
    entry_live = go(fd.body, out0)
    live_after[0] = frozenset(entry_live | params)
    return live_after
