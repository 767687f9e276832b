"""Alias sets: symmetric sets of unordered pairs of variable components.

A pair {x.c1, y.c2} means some word of component c1 of x may be the
same memory word as some word of component c2 of y.  Self pairs
{x.c, x.c} record that component c of x may be non-empty; every
analysis-produced set is closed under taking self pairs of mentioned
variable components.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Optional

from .components import Component, comp_str, parse_comp


@total_ordering
@dataclass(frozen=True)
class VarComp:
    var: str
    comp: Component

    def __lt__(self, other: "VarComp") -> bool:
        return (self.var, self.comp) < (other.var, other.comp)

    def __str__(self) -> str:
        return f"{self.var}.{comp_str(self.comp)}"


Pair = tuple  # canonical: (min(vc1, vc2), max(vc1, vc2))


def mk_pair(a: VarComp, b: VarComp) -> Pair:
    return (a, b) if a <= b else (b, a)


class AliasSet:
    """Immutable set of canonical pairs."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: Iterable[Pair] = ()):
        self.pairs = frozenset(pairs)

    # -- base ops ------------------------------------------------------------
    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __eq__(self, other) -> bool:
        return isinstance(other, AliasSet) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"AliasSet({sorted(self.pairs)!r})"

    def union(self, *others: "AliasSet") -> "AliasSet":
        acc = set(self.pairs)
        for o in others:
            acc |= o.pairs if isinstance(o, AliasSet) else set(o)
        return AliasSet(acc)

    def difference(self, other: "AliasSet") -> "AliasSet":
        return AliasSet(self.pairs - other.pairs)

    def is_subset(self, other: "AliasSet") -> bool:
        return self.pairs <= other.pairs

    # -- queries -------------------------------------------------------------
    def vars(self) -> frozenset:
        return frozenset(vc.var for p in self.pairs for vc in p)

    def mentions(self, var: str) -> "AliasSet":
        return AliasSet(p for p in self.pairs
                        if p[0].var == var or p[1].var == var)

    def pairs_with(self, vc: VarComp) -> frozenset:
        """All partners of vc (including vc itself when self-paired)."""
        out = set()
        for a, b in self.pairs:
            if a == vc:
                out.add(b)
            if b == vc:
                out.add(a)
        return frozenset(out)

    def restrict_to(self, keep: Iterable[str]) -> "AliasSet":
        ks = set(keep)
        return AliasSet(p for p in self.pairs
                        if p[0].var in ks and p[1].var in ks)

    def restrict_out(self, drop: Iterable[str]) -> "AliasSet":
        ds = set(drop)
        return AliasSet(p for p in self.pairs
                        if p[0].var not in ds and p[1].var not in ds)

    def with_self_closure(self) -> "AliasSet":
        acc = set(self.pairs)
        for a, b in self.pairs:
            acc.add((a, a))
            acc.add((b, b))
        return AliasSet(acc)

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        return {"pairs": [[_vc_json(a), _vc_json(b)]
                          for a, b in sorted(self.pairs)]}

    @staticmethod
    def from_json(d: dict) -> "AliasSet":
        return AliasSet(mk_pair(_vc_unjson(a), _vc_unjson(b))
                        for a, b in d["pairs"])

    def text(self) -> str:
        return "{" + ", ".join(
            str(a) if a == b else f"{{{a}, {b}}}"
            for a, b in sorted(self.pairs)) + "}"

    def compact_groups(self) -> list:
        """Cover of the pair set by cliques of mutually aliased variable
        components.  Expanding every group back to all its (unordered,
        self-inclusive) pairs reproduces the set exactly, provided the
        set is closed under self pairs."""
        adj: dict = {}
        for a, b in self.pairs:
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        uncovered = set(p for p in self.pairs if p[0] != p[1])
        covered_nodes: set = set()
        groups = []
        for a, b in sorted(uncovered):
            if (a, b) not in uncovered:
                continue
            group = [a, b]
            for cand in sorted(adj):
                if cand in group:
                    continue
                if all(cand in adj[m] for m in group):
                    group.append(cand)
            group.sort()
            groups.append(group)
            for i, x in enumerate(group):
                covered_nodes.add(x)
                for y in group[i + 1:]:
                    uncovered.discard(mk_pair(x, y))
        for vc in sorted(adj):
            if vc not in covered_nodes and (vc, vc) in self.pairs:
                groups.append([vc])
                covered_nodes.add(vc)
        return groups

    def compact_text(self) -> str:
        return "{" + ", ".join(
            "{" + ", ".join(str(m) for m in g) + "}"
            for g in self.compact_groups()) + "}"

    @staticmethod
    def expand_groups(groups: Iterable[Iterable[VarComp]]) -> "AliasSet":
        acc = set()
        for g in groups:
            ms = list(g)
            for i, x in enumerate(ms):
                acc.add((x, x))
                for y in ms[i + 1:]:
                    acc.add(mk_pair(x, y))
        return AliasSet(acc)


def _vc_json(vc: VarComp) -> dict:
    return {"var": vc.var, "comp": [f"{dc}.{i}" for dc, i in vc.comp]}


def _vc_unjson(d: dict) -> VarComp:
    comp = tuple((s.rsplit(".", 1)[0], int(s.rsplit(".", 1)[1]))
                 for s in d["comp"])
    return VarComp(d["var"], comp)


def parse_varcomp(s: str) -> VarComp:
    """Parse ``var.[Cons.1,RNode.2]`` text form."""
    var, comp = s.split(".", 1)
    return VarComp(var.strip(), parse_comp(comp))


def vc(var: str, comp: str) -> VarComp:
    """Shorthand constructor used heavily in tests."""
    return VarComp(var, parse_comp(comp))


def alias_set_from_groups(*groups) -> AliasSet:
    """Build an alias set from clique groups given in text form."""
    return AliasSet.expand_groups(
        [[parse_varcomp(m) for m in g] for g in groups])


def aliasset_json_str(a: AliasSet) -> str:
    return json.dumps(a.to_json(), indent=None, sort_keys=True)


@dataclass(frozen=True)
class Renaming:
    """Maps source variable names to (target variable, component prefix).

    Components are re-prefixed; variables not in the map (e.g. abstract
    pseudo-variables) pass through unchanged.
    """

    mapping: tuple  # of (src, (target, prefix Component))

    @staticmethod
    def of(d: dict) -> "Renaming":
        def norm(v):
            if v is None:
                return None
            if (isinstance(v, tuple) and len(v) == 2
                    and isinstance(v[1], tuple)):
                return v
            return (v, ())
        return Renaming(tuple(sorted((k, norm(v)) for k, v in d.items())))

    def as_dict(self) -> dict:
        return dict(self.mapping)

    def apply_vc(self, x: VarComp) -> Optional[VarComp]:
        m = self.as_dict()
        if x.var not in m:
            return x
        tgt = m[x.var]
        if tgt is None:
            return None
        var, prefix = tgt
        return VarComp(var, tuple(prefix) + x.comp)

    def apply(self, a: AliasSet) -> AliasSet:
        out = set()
        for p, q in a:
            rp, rq = self.apply_vc(p), self.apply_vc(q)
            if rp is None or rq is None:
                continue
            out.add(mk_pair(rp, rq))
        return AliasSet(out)
