"""Type-folded component domain.

A *component* of a variable names a set of memory words reachable from
it: a path of (constructor, argument-index) steps, folded so that each
type has finitely many components.  ``Ref``, ``Array_`` and ``Cl`` are
pseudo-constructors for reference cells, array slots and closure
arguments.

Two fold disciplines are supported:

* ``DomainMode.OLD`` — when a step leads to a value whose type already
  occurs on the ancestor chain, the step folds to the (shorter) path of
  that ancestor.  Recursive types therefore have an empty component
  ``[]`` standing for all same-typed descendants of the root.
* ``DomainMode.NEW`` — every reachable word keeps a non-empty path; a
  step taken *from* a type that already occurred on the chain first
  rewinds to the first occurrence, so paths never unfold recursion more
  than one constructor deep (``[RNode.2,Cons.2,Cons.2]`` folds to
  ``[RNode.2,Cons.2]``).
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from .syntax import ArrayT, ConsDef, FnT, Meta, Named, Program, RefT, TypeVar

REF_STEP = ("Ref", 1)
CL = "Cl"
ARRAY = "Array_"

PathStep = tuple  # (cons name, 1-based arg index)
Component = tuple  # of PathStep

# Sentinel type for the contents of closure-argument words whose type is
# statically unknown: no folding happens below such a word.
_OPAQUE = Named("<opaque>")


class DomainMode(Enum):
    OLD = "old"
    NEW = "new"


class DomainError(Exception):
    pass


def comp_str(c: Component) -> str:
    return "[" + ",".join(f"{dc}.{i}" for (dc, i) in c) + "]"


def parse_comp(s: str) -> Component:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"bad component {s!r}")
    body = s[1:-1].strip()
    if not body:
        return ()
    out = []
    for part in body.split(","):
        dc, i = part.strip().rsplit(".", 1)
        out.append((dc, int(i)))
    return tuple(out)


class Universe:
    """Component computations for one program and one domain mode."""

    def __init__(self, program: Program, mode: DomainMode):
        self.program = program
        self.mode = mode
        self._comp_cache: dict = {}

    # -- type structure -----------------------------------------------------
    def resolve(self, t):
        """Expand type synonyms (cycle detection happens in the checker)."""
        seen = set()
        while isinstance(t, Meta) and t.ref is not None:
            t = t.ref
        while isinstance(t, Named) and t.name in self.program.synonyms:
            if t.name in seen:
                raise DomainError(f"cyclic type synonym {t.name}")
            seen.add(t.name)
            t = self.program.synonyms[t.name]
        return t

    def step_type(self, t, dc: str, i: int) -> Optional[object]:
        """Type of the word reached by step (dc, i) from a value of type t,
        or None if the step is not legal at t."""
        t = self.resolve(t)
        if isinstance(t, RefT):
            return t.target if (dc, i) == REF_STEP else None
        if isinstance(t, ArrayT):
            return t.elem if (dc, i) == (ARRAY, 1) else None
        if isinstance(t, FnT):
            if dc != CL or i < 1:
                return None
            if i <= len(t.closed):
                return t.closed[i - 1]
            return _OPAQUE
        if t is _OPAQUE:
            return _OPAQUE
        if isinstance(t, Named):
            dd = self.program.datadefs.get(t.name)
            if dd is None:
                return None
            for cd in dd.constructors:
                if cd.name == dc and 1 <= i <= len(cd.arg_types):
                    sub = dict(zip(dd.params, t.args))
                    return _subst(cd.arg_types[i - 1], sub)
            return None
        return None

    def constructors(self, t):
        t = self.resolve(t)
        if isinstance(t, Named):
            dd = self.program.datadefs.get(t.name)
            if dd is not None:
                sub = dict(zip(dd.params, t.args))
                return [(cd.name,
                         [_subst(a, sub) for a in cd.arg_types])
                        for cd in dd.constructors]
        return []

    # -- folding ------------------------------------------------------------
    def fold_step(self, path: Component, types: tuple, dc: str, i: int):
        """One folding step.  ``types`` has len(path)+1 entries: the type at
        the root and after each step of ``path``.  Returns (path', types')
        or raises DomainError for an illegal step."""
        cur = self.resolve(types[-1])
        if self.mode is DomainMode.NEW and cur is not _OPAQUE:
            for k in range(len(path)):
                if self.resolve(types[k]) == cur:
                    path, types = path[:k], types[:k + 1]
                    cur = self.resolve(types[-1])
                    break
        nxt = self.step_type(cur, dc, i)
        if nxt is None:
            raise DomainError(
                f"no step {dc}.{i} at type {cur}")
        nxt_r = self.resolve(nxt)
        if self.mode is DomainMode.OLD and nxt_r is not _OPAQUE:
            for k in range(len(path) + 1):
                if self.resolve(types[k]) == nxt_r:
                    return path[:k], types[:k + 1]
        return path + ((dc, i),), types + (nxt,)

    def fc(self, t, raw_path, strict: bool = True) -> Optional[Component]:
        """Fold an arbitrary step path against type ``t``.

        With strict=False, illegal paths yield None instead of raising
        (used when speculatively concatenating components of possibly
        unrelated types during transfer)."""
        path: Component = ()
        types = (t,)
        for (dc, i) in raw_path:
            try:
                path, types = self.fold_step(path, types, dc, i)
            except DomainError:
                if strict:
                    raise
                return None
        return path

    def components_of(self, t) -> frozenset:
        """All components of a value of type ``t`` (excluding the empty
        root path unless folding produces it, which only happens in OLD
        mode for recursive types)."""
        t = self.resolve(t)
        key = (t,)
        if key in self._comp_cache:
            return self._comp_cache[key]
        comps: set = set()
        seen: set = set()

        def visit(path: Component, types: tuple):
            if path in seen:
                return
            seen.add(path)
            cur = self.resolve(types[-1])
            if cur is _OPAQUE:
                return
            if isinstance(cur, RefT):
                steps = [REF_STEP]
            elif isinstance(cur, ArrayT):
                steps = [(ARRAY, 1)]
            elif isinstance(cur, FnT):
                steps = [(CL, i + 1) for i in range(len(cur.closed))]
            else:
                steps = [(cd, i + 1)
                         for cd, args in self.constructors(cur)
                         for i in range(len(args))]
            if self.mode is DomainMode.NEW:
                # Extensions from a repeated type fold back to the first
                # occurrence; nothing new can be generated from here.
                if any(self.resolve(ty) == cur for ty in types[:-1]):
                    return
            for (dc, i) in steps:
                p2, t2 = self.fold_step(path, types, dc, i)
                comps.add(p2)
                if len(p2) > len(path):
                    visit(p2, t2)

        if not isinstance(t, (TypeVar, Meta)):
            visit((), (t,))
        result = frozenset(comps)
        self._comp_cache[key] = result
        return result

    def preimages_under(self, t, dc: str, i: int, c: Component) -> list:
        """All argument-side components ``rest`` such that the one-layer
        path [dc.i] ++ rest folds to ``c`` in type ``t``."""
        arg_t = self.step_type(self.resolve(t), dc, i)
        if arg_t is None:
            return []
        rests = set(self.components_of(arg_t)) | {()}
        out = []
        for rest in sorted(rests):
            if self.fc(t, ((dc, i),) + rest, strict=False) == c:
                out.append(rest)
        return out

    def unfold_preimages(self, t, c: Component) -> frozenset:
        """Inverse image of fc restricted to one constructor layer: all
        paths ``[dc.i] ++ rest`` (rest a component of the argument type)
        that fold to ``c``."""
        t = self.resolve(t)
        out = set()
        steps = []
        if isinstance(t, RefT):
            steps = [REF_STEP]
        elif isinstance(t, ArrayT):
            steps = [(ARRAY, 1)]
        else:
            steps = [(cd, i + 1)
                     for cd, args in self.constructors(t)
                     for i in range(len(args))]
        for (dc, i) in steps:
            for rest in self.preimages_under(t, dc, i, c):
                out.add(((dc, i),) + rest)
        return frozenset(out)

    def concat_fold(self, t, base: Component, tail) -> Optional[Component]:
        """fc(t, base ++ tail) tolerating illegal concatenations (None)."""
        return self.fc(t, tuple(base) + tuple(tail), strict=False)


def _subst(t, sub: dict):
    if isinstance(t, TypeVar):
        return sub.get(t.name, t)
    if isinstance(t, Named):
        return Named(t.name, tuple(_subst(a, sub) for a in t.args))
    if isinstance(t, RefT):
        return RefT(_subst(t.target, sub))
    if isinstance(t, ArrayT):
        return ArrayT(_subst(t.elem, sub))
    if isinstance(t, FnT):
        return FnT(tuple(_subst(a, sub) for a in t.args),
                   _subst(t.result, sub), t.sig,
                   tuple(_subst(a, sub) for a in t.closed))
    return t
