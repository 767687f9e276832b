"""Sharing analysis: abstract execution of function bodies over alias
sets, condition lowering, and the static checks that make destructive
update safe (``!`` annotations present, abstract data never updated,
pre/postconditions respected).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .aliasset import AliasSet, Renaming, VarComp, mk_pair
from .components import CL, DomainMode, Universe
from .liveness import compute_liveness
from .syntax import (
    App, ArrayRef, Assign, Bind, Case, CDC, Cond, ConsArg, CStarEq, DerefEq,
    EqDeref, EqVar, ErrorStmt, FnT, FuncDef, Instype, IntArg, Named, Program,
    RefT, RESULT_VAR, VarArg, iter_points, stmt_bangs, type_str,
)

ABSTRACT_PREFIX = "abstract:"

# Diagnostic kinds
MISSING_BANG = "MissingBang"
ABSTRACT_UPDATE = "AbstractUpdate"
PRECONDITION_VIOLATED = "PreconditionViolated"
POSTCONDITION_VIOLATED = "PostconditionViolated"
UNDECLARED_MUTABLE = "UndeclaredMutable"
INSTYPE_HAZARD = "InstypeHazard"


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    point: str          # program-point label, e.g. "list_bst:3"
    message: str

    def __str__(self) -> str:
        return f"{self.point}: {self.kind}: {self.message}"


@dataclass
class FuncResult:
    name: str
    per_point: dict                 # int point -> AliasSet
    diagnostics: list
    final: AliasSet
    allowed: AliasSet

    def labelled_points(self) -> dict:
        return {f"{self.name}:{p}": a for p, a in self.per_point.items()}

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def abstract_var(t) -> str:
    return ABSTRACT_PREFIX + type_str(t)


def is_abstract(var: str) -> bool:
    return var.startswith(ABSTRACT_PREFIX)


@dataclass
class Options:
    mode: DomainMode = DomainMode.NEW
    precise_app: bool = False


class AnalysisCtx:
    """Program-wide pieces shared by all function analyses."""

    def __init__(self, program: Program, options: Options = None):
        self.program = program
        self.options = options or Options()
        self.u = Universe(program, self.options.mode)

    # -- small helpers --------------------------------------------------------
    def comps(self, t) -> frozenset:
        return self.u.components_of(t)

    def selfs(self, var: str, t) -> set:
        return {(VarComp(var, c), VarComp(var, c)) for c in self.comps(t)}

    def strip_ref(self, t, n: int = 1):
        for _ in range(n):
            t = self.u.resolve(t)
            if not isinstance(t, RefT):
                raise AnalysisError(f"expected reference type, got {t}")
            t = t.target
        return t

    # -- condition lowering ----------------------------------------------------
    def lower_condition(self, cond: Cond, env: dict, base=None):
        """Lower a pre/postcondition to an alias set over the variables of
        ``env`` (formal parameters, possibly the result) plus abstract
        pseudo-variables.  ``base`` gives pairs already holding before the
        condition's bindings run (a postcondition describes sharing added
        on top of the precondition state).
        Returns (AliasSet, {abstract var: type})."""
        env = dict(env)
        abstracts: dict = {}
        if cond.explicit is not None:
            start = set() if base is None else set(base)
            for v, t in env.items():
                start |= self.selfs(v, t)
            return AliasSet(start).union(AliasSet(cond.explicit)), abstracts

        # infer types for condition-local variables
        local = dict(env)
        stmts = list(cond.stmts)
        for _round in range(len(stmts) + 1):
            changed = False
            for st in stmts:
                if isinstance(st, CStarEq):
                    if st.rhs == "abstract":
                        continue
                    tl, tr = local.get(st.lhs), local.get(st.rhs)
                    if tl is not None and tr is None:
                        v = self.strip_ref(tl, st.stars_l)
                        local[st.rhs] = _wrap_refs(v, st.stars_r)
                        changed = True
                    elif tr is not None and tl is None:
                        v = self.strip_ref(tr, st.stars_r)
                        local[st.lhs] = _wrap_refs(v, st.stars_l)
                        changed = True
                else:  # CDC
                    if st.var in local:
                        arg_ts = self._cdc_arg_types(local[st.var], st)
                        for a, t in zip(st.args, arg_ts):
                            if a not in local:
                                local[a] = t
                                changed = True
            if not changed:
                break
        for st in stmts:
            names = ([st.lhs] + ([st.rhs] if st.rhs != "abstract" else [])
                     if isinstance(st, CStarEq)
                     else [st.var] + list(st.args))
            for n in names:
                if n not in local:
                    raise AnalysisError(
                        f"cannot infer type of {n!r} in condition")

        pairs: set = set() if base is None else set(base)
        for v, t in local.items():
            pairs |= self.selfs(v, t)
        a = AliasSet(pairs)
        types = dict(local)
        temps: list = []
        for st in stmts:
            if isinstance(st, CStarEq):
                a = self._lower_stareq(st, a, types, abstracts, temps)
            else:
                a = self._transfer_dc_generic(
                    st.var, st.cons,
                    [VarArg(x) for x in st.args], a, types)
        keep = set(env) | set(abstracts)
        a = AliasSet(p for p in a
                     if all(x.var in keep for x in p))
        return a, abstracts

    def _cdc_arg_types(self, t, st: CDC):
        t = self.u.resolve(t)
        if not isinstance(t, Named):
            raise AnalysisError(f"cannot match {st.cons} against type {t}")
        args = dict(self.u.constructors(t)).get(st.cons)
        if args is None or len(args) != len(st.args):
            raise AnalysisError(f"bad condition constructor {st.cons}")
        return args

    def _lower_stareq(self, st: CStarEq, a: AliasSet, types: dict,
                      abstracts: dict, temps: list) -> AliasSet:
        # right-hand side: peel n dereferences via fresh temporaries
        if st.rhs == "abstract":
            val_t = self.strip_ref(types[st.lhs], st.stars_l)
            rhs = abstract_var(val_t)
            if rhs not in abstracts:
                abstracts[rhs] = val_t
                types[rhs] = val_t
                a = a.union(AliasSet(self.selfs(rhs, val_t)))
        else:
            rhs = st.rhs
        u = rhs
        for k in range(st.stars_r):
            tmp = f"$c{len(temps)}"
            temps.append(tmp)
            types[tmp] = self.strip_ref(types[u])
            a = self.transfer_eqderef(tmp, u, a, types)
            u = tmp
        if st.stars_l == 0:
            a = self.transfer_eqvar(st.lhs, u, a)
        else:
            a = self._prefix_bind(st.lhs, st.stars_l, u, a, types)
        if temps:
            drop = set(temps)
            a = AliasSet(p for p in a
                         if all(x.var not in drop for x in p))
        return a

    def _prefix_bind(self, v: str, m: int, w: str, a: AliasSet,
                     types: dict) -> AliasSet:
        """Add the sharing implied by ``*^m v = w``: the word reached by m
        dereferences of v holds (a value aliasing) w."""
        tv = types[v]
        prefix = (("Ref", 1),) * m
        adds = {(VarComp(v, (("Ref", 1),) * k),) * 2 for k in range(1, m + 1)}
        adds |= self._lift_pairs(
            a, w, lambda c: self._fold_vc(v, tv, prefix + c))
        return a.union(AliasSet(adds))

    def _fold_vc(self, var: str, t, raw) -> Optional[VarComp]:
        c = self.u.fc(t, raw, strict=False)
        return None if c is None else VarComp(var, c)

    def _lift_pairs(self, a: AliasSet, w: str, mk) -> set:
        """Core of EqVar/DerefEq-style rules: for every pair with a ``w``
        side, emit the pair with that side replaced by ``mk(comp)``; for
        pairs internal to ``w``, also emit the both-sides version."""
        out: set = set()
        for p, q in a:
            reps = []
            if p.var == w:
                rp = mk(p.comp)
                if rp is not None:
                    out.add(mk_pair(rp, q))
                    reps.append((rp, q))
            if q.var == w:
                rq = mk(q.comp)
                if rq is not None:
                    out.add(mk_pair(p, rq))
                    if p.var == w:
                        rp = mk(p.comp)
                        if rp is not None:
                            out.add(mk_pair(rp, rq))
        return out

    # -- statement transfer functions -------------------------------------------
    def transfer_eqvar(self, v: str, w: str, a: AliasSet) -> AliasSet:
        return a.union(AliasSet(self._lift_pairs(
            a, w, lambda c: VarComp(v, c))))

    def transfer_eqderef(self, v: str, w: str, a: AliasSet,
                         types: dict) -> AliasSet:
        tw = types[w]
        tv = self.strip_ref(tw)
        cands = []
        for c1 in sorted(self.comps(tv)):
            wc = self._fold_vc(w, tw, (("Ref", 1),) + c1)
            if wc is not None:
                cands.append((c1, wc))
        adds: set = set()
        for c1, wc in cands:
            for partner in a.pairs_with(wc):
                adds.add(mk_pair(VarComp(v, c1), partner))
        for (c1, wc1), (c2, wc2) in product(cands, cands):
            if mk_pair(wc1, wc2) in a:
                adds.add(mk_pair(VarComp(v, c1), VarComp(v, c2)))
        return a.union(AliasSet(adds))

    def transfer_derefeq(self, v: str, src, a: AliasSet,
                         types: dict) -> AliasSet:
        tv = types[v]
        adds = {(VarComp(v, (("Ref", 1),)),) * 2}
        if isinstance(src, VarArg):
            adds |= self._lift_pairs(
                a, src.name,
                lambda c: self._fold_vc(v, tv, (("Ref", 1),) + c))
        return a.union(AliasSet(adds))

    def _transfer_dc_generic(self, v: str, cons: str, args, a: AliasSet,
                             types: dict) -> AliasSet:
        tv = types[v]
        n = len(args)
        adds: set = set()
        for p in range(1, n + 1):
            vc = self._fold_vc(v, tv, ((cons, p),))
            if vc is not None:
                adds.add((vc, vc))
        positions: dict = {}
        for p, arg in enumerate(args, start=1):
            if isinstance(arg, VarArg):
                positions.setdefault(arg.name, []).append(p)
        for pr, q in a:
            p_reps = [self._fold_vc(v, tv, ((cons, i),) + pr.comp)
                      for i in positions.get(pr.var, ())]
            q_reps = [self._fold_vc(v, tv, ((cons, i),) + q.comp)
                      for i in positions.get(q.var, ())]
            p_reps = [x for x in p_reps if x is not None]
            q_reps = [x for x in q_reps if x is not None]
            for xr in p_reps:
                adds.add(mk_pair(xr, q))
            for yr in q_reps:
                adds.add(mk_pair(pr, yr))
            for xr, yr in product(p_reps, q_reps):
                adds.add(mk_pair(xr, yr))
        return a.union(AliasSet(adds))


def _wrap_refs(t, n: int):
    for _ in range(n):
        t = RefT(t)
    return t


class FunctionAnalyzer:
    """Abstractly executes one function body."""

    def __init__(self, ctx: AnalysisCtx, fd: FuncDef):
        self.ctx = ctx
        self.u = ctx.u
        self.fd = fd
        self.types = dict(fd.var_types)
        self.params = [n for (n, _t, _m) in fd.params]
        self.mut_params = {n for (n, _t, m) in fd.params if m}
        self.live = compute_liveness(fd)
        self.per_point: dict = {}
        self.diags: list = []
        self.later_bangs = self._later_bangs()

    # -- helpers ---------------------------------------------------------------
    def label(self, point: int) -> str:
        return f"{self.fd.name}:{point}"

    def diag(self, kind: str, point: int, msg: str):
        self.diags.append(Diagnostic(kind, self.label(point), msg))

    def _later_bangs(self) -> dict:
        """For each program point, the variables annotated ! at any later
        point (used by the Instype hazard check)."""
        pts = sorted(iter_points(self.fd.body), key=lambda x: x[0])
        out: dict = {}
        acc: frozenset = frozenset()
        for point, (kind, s, _alt) in reversed(pts):
            out[point] = acc
            if kind == "stmt":
                acc = acc | stmt_bangs(s)
        return out

    def live_after(self, point: int) -> frozenset:
        return self.live.get(point, frozenset(self.params))

    # -- top level ---------------------------------------------------------------
    def run(self) -> FuncResult:
        ctx = self.ctx
        param_env = {n: self.types[n] for n in self.params}
        a0, abs_pre = ctx.lower_condition(self.fd.pre, param_env)
        for name, t in abs_pre.items():
            self.types[name] = t
        self.per_point[0] = a0
        a_end = self.transfer_block(self.fd.body, a0)

        post_env = dict(param_env)
        post_env[RESULT_VAR] = self.types.get(
            RESULT_VAR, self.fd.result_type)
        post_env.update(abs_pre)
        lowered_post, abs_post = ctx.lower_condition(self.fd.post, post_env,
                                                     base=a0)
        for name, t in abs_post.items():
            self.types.setdefault(name, t)
        allowed = a0.union(lowered_post)
        keep = (set(self.params) | {RESULT_VAR} |
                {v for v in a_end.vars() if is_abstract(v)} |
                set(abs_pre) | set(abs_post))
        final = a_end.restrict_to(keep)
        if not final.is_subset(allowed):
            extra = final.difference(allowed)
            sample = ", ".join(
                f"{{{p}, {q}}}" for p, q in sorted(extra)[:6])
            self.diag(POSTCONDITION_VIOLATED, self.fd.max_point,
                      f"result sharing not covered by pre/post: {sample}")
        self._check_declared_mutable()
        return FuncResult(self.fd.name, self.per_point, self.diags,
                          final, allowed)

    def _check_declared_mutable(self):
        flagged = set()
        for point, (kind, s, _alt) in iter_points(self.fd.body):
            if kind != "stmt":
                continue
            for b in stmt_bangs(s):
                if b in self.params and b not in self.mut_params \
                        and b not in flagged:
                    flagged.add(b)
                    self.diags.append(Diagnostic(
                        UNDECLARED_MUTABLE, self.label(point),
                        f"parameter {b!r} is annotated ! but not "
                        "declared mutable"))

    # -- statement dispatch ---------------------------------------------------------
    def transfer_block(self, body, a: AliasSet) -> AliasSet:
        for s in body:
            a = self.transfer(s, a)
        return a

    def transfer(self, s, a: AliasSet) -> AliasSet:
        ctx = self.ctx
        if isinstance(s, EqVar):
            out = ctx.transfer_eqvar(s.var, s.src, a)
        elif isinstance(s, EqDeref):
            out = ctx.transfer_eqderef(s.var, s.src, a, self.types)
        elif isinstance(s, DerefEq):
            out = ctx.transfer_derefeq(s.var, s.src, a, self.types)
        elif isinstance(s, Bind):
            if s.cons is None or s.cons == "()":
                out = a
            else:
                out = ctx._transfer_dc_generic(s.var, s.cons, s.args, a,
                                               self.types)
        elif isinstance(s, Assign):
            out = self.transfer_assign(s, a)
        elif isinstance(s, App):
            out = self.transfer_app(s, a)
        elif isinstance(s, ArrayRef):
            out = self.transfer_arrayref(s, a)
        elif isinstance(s, Instype):
            out = self.transfer_instype(s, a)
        elif isinstance(s, Case):
            out = self.transfer_case(s, a)
            return out
        elif isinstance(s, ErrorStmt):
            out = AliasSet()
        else:
            raise AnalysisError(f"unknown statement {s!r}")
        self.per_point[s.point] = out
        return out

    # -- assignment ---------------------------------------------------------------
    def transfer_assign(self, s: Assign, a: AliasSet) -> AliasSet:
        ctx = self.ctx
        vref = VarComp(s.var, (("Ref", 1),))
        al = set(a.pairs_with(vref)) | {vref}
        live = self.live_after(s.point)
        for wv in sorted({x.var for x in al}):
            if is_abstract(wv):
                self.diag(ABSTRACT_UPDATE, s.point,
                          f"assignment may update abstract data ({wv})")
                continue
            if wv in live and wv not in s.bangs:
                self.diag(MISSING_BANG, s.point,
                          f"live variable {wv!r} may be updated but lacks !")
        for x in al:
            for partner in a.pairs_with(x):
                if is_abstract(partner.var):
                    self.diag(ABSTRACT_UPDATE, s.point,
                              f"updated location {x} may alias abstract "
                              f"data ({partner.var})")
                    break
        adds: set = set()
        if isinstance(s.src, VarArg):
            w = s.src.name
            for x in al:
                tx = self.types.get(x.var)
                if tx is None:
                    continue
                for pr, q in a:
                    if pr.var == w:
                        nc = ctx._fold_vc(x.var, tx, x.comp + pr.comp)
                        if nc is not None:
                            adds.add(mk_pair(nc, q))
                    if q.var == w:
                        nc = ctx._fold_vc(x.var, tx, x.comp + q.comp)
                        if nc is not None:
                            adds.add(mk_pair(pr, nc))
            # pairs among the aliased cells, lifted over w's internal pairs
            for x, y in product(al, al):
                tx, ty = self.types.get(x.var), self.types.get(y.var)
                if tx is None or ty is None:
                    continue
                for pr, q in a:
                    for (c1, c2) in (((pr.comp, q.comp),)
                                     if (pr.var == w and q.var == w) else ()):
                        n1 = ctx._fold_vc(x.var, tx, x.comp + c1)
                        n2 = ctx._fold_vc(y.var, ty, y.comp + c2)
                        if n1 is not None and n2 is not None:
                            adds.add(mk_pair(n1, n2))
                        n1 = ctx._fold_vc(x.var, tx, x.comp + c2)
                        n2 = ctx._fold_vc(y.var, ty, y.comp + c1)
                        if n1 is not None and n2 is not None:
                            adds.add(mk_pair(n1, n2))
        if s.var in self.mut_params:
            return a.union(AliasSet(adds))
        old1 = AliasSet(
            p for p in a
            if any(x.var == s.var and len(x.comp) >= 2 for x in p))
        return a.difference(old1).union(AliasSet(adds))

    # -- application ----------------------------------------------------------------
    def transfer_app(self, s: App, a: AliasSet) -> AliasSet:
        ctx = self.ctx
        inst = s.inst
        if inst is None:
            raise AnalysisError(f"{self.label(s.point)}: untyped application")
        n = len(s.args)
        sat = n == inst.remaining
        vt = self.u.resolve(self.types[s.var])
        adds: set = set()

        suppress_closure = (ctx.options.precise_app and sat
                            and inst.fn_name is not None)
        if isinstance(vt, FnT) and not suppress_closure:
            adds |= self._closure_sharing(s, a, vt, n)
        if not sat:
            out = a.union(AliasSet(adds))
            self.per_point[s.point] = out
            return out

        sig = inst.sig
        k = inst.n_closed
        formal_names = [p for (p, _m) in sig.params]
        formal_types = dict(zip(formal_names, inst.formal_types))
        pre_env = dict(formal_types)
        lowered_pre, _abs1 = ctx.lower_condition(sig.pre, pre_env)
        post_env = dict(formal_types)
        post_env[RESULT_VAR] = inst.result_type
        lowered_post, _abs2 = ctx.lower_condition(sig.post, post_env)
        for name, t in {**_abs1, **_abs2}.items():
            self.types.setdefault(name, t)

        mut_formals = {p for (p, m) in sig.params if m}
        pre_mut = AliasSet(p for p in lowered_pre
                           if any(x.var in mut_formals for x in p))
        post_full = lowered_post.union(pre_mut)

        ren: dict = {}
        for j, (pname, _m) in enumerate(sig.params):
            if j < k:
                ren[pname] = (s.fn, ((CL, k - j),))
            else:
                actual = s.args[j - k]
                ren[pname] = actual.name if isinstance(actual, VarArg) \
                    else None
        ren[RESULT_VAR] = s.var
        renaming = Renaming.of(ren)
        rpre = renaming.apply(lowered_pre)
        rpost = renaming.apply(post_full)

        # precondition: sharing among the arguments must be anticipated
        argvars = {x.name for x in s.args if isinstance(x, VarArg)}
        if k > 0:
            argvars.add(s.fn)
        relevant = AliasSet(
            p for p in a
            if any(x.var in argvars for x in p)
            and all(x.var in argvars or is_abstract(x.var) for x in p))
        if not relevant.is_subset(rpre):
            extra = relevant.difference(rpre)
            sample = ", ".join(f"{{{p}, {q}}}" for p, q in sorted(extra)[:6])
            self.diag(PRECONDITION_VIOLATED, s.point,
                      f"call sharing not allowed by precondition of "
                      f"{s.fn!r}: {sample}")

        # mutable arguments: annotation and abstract checks
        live = self.live_after(s.point)
        mut_actuals = []
        for j, (pname, m) in enumerate(sig.params):
            if not m or j < k:
                continue
            actual = s.args[j - k]
            if not isinstance(actual, VarArg):
                continue
            mut_actuals.append(actual.name)
            sharers = {actual.name}
            abstract_hit = None
            for p, q in a.mentions(actual.name):
                for x, y in ((p, q), (q, p)):
                    if x.var == actual.name:
                        sharers.add(y.var)
                        if is_abstract(y.var):
                            abstract_hit = y.var
            for wv in sorted(sharers):
                if is_abstract(wv):
                    continue
                if wv in live and wv not in s.bangs:
                    self.diag(MISSING_BANG, s.point,
                              f"live variable {wv!r} may be updated by "
                              f"{s.fn!r} but lacks !")
            if abstract_hit:
                self.diag(ABSTRACT_UPDATE, s.point,
                          f"mutable argument {actual.name!r} may alias "
                          f"abstract data ({abstract_hit})")

        postt: set = set()
        for p, q in rpost:
            for x, y in ((p, q), (q, p)):
                for partner in a.pairs_with(y):
                    postt.add(mk_pair(x, partner))
        postm: set = set()
        mutset = set(mut_actuals)
        for p, q in rpost:
            if p.var in mutset and q.var in mutset:
                for x1 in a.pairs_with(p):
                    for x2 in a.pairs_with(q):
                        postm.add(mk_pair(x1, x2))
        out = a.union(AliasSet(adds), rpost, AliasSet(postt),
                      AliasSet(postm))
        self.per_point[s.point] = out
        return out

    def _closure_sharing(self, s: App, a: AliasSet, vt: FnT,
                         n: int) -> set:
        ctx = self.ctx
        adds: set = set()
        for i in range(1, n + 1):
            vc = VarComp(s.var, ((CL, i),))
            adds.add((vc, vc))
        positions: dict = {}
        for i, arg in enumerate(s.args, start=1):
            if isinstance(arg, VarArg):
                positions.setdefault(arg.name, []).append(n + 1 - i)
        for pr, q in a:
            p_reps = [VarComp(s.var, ((CL, i),) + pr.comp)
                      for i in positions.get(pr.var, ())]
            q_reps = [VarComp(s.var, ((CL, i),) + q.comp)
                      for i in positions.get(q.var, ())]
            for xr in p_reps:
                adds.add(mk_pair(xr, q))
            for yr in q_reps:
                adds.add(mk_pair(pr, yr))
            for xr, yr in product(p_reps, q_reps):
                adds.add(mk_pair(xr, yr))
        # existing closure arguments of the callee shift out by n
        if s.fn in self.types:
            shifted = {}
            for pr, q in a.mentions(s.fn):
                for x in (pr, q):
                    if x.var == s.fn and x.comp and x.comp[0][0] == CL:
                        i = x.comp[0][1]
                        shifted[x] = VarComp(
                            s.var, ((CL, i + n),) + x.comp[1:])
            for pr, q in a.mentions(s.fn):
                rp = shifted.get(pr, pr)
                rq = shifted.get(q, q)
                if rp is not pr or rq is not q:
                    adds.add(mk_pair(rp, rq))
        return adds

    # -- arrays -----------------------------------------------------------------
    def transfer_arrayref(self, s: ArrayRef, a: AliasSet) -> AliasSet:
        ctx = self.ctx
        t_arr = self.types[s.arr]
        t_v = self.types[s.var]
        elem = self.u.resolve(t_arr).elem
        cands = []
        for c1 in sorted(set(self.u.components_of(elem)) | {()}):
            wc = ctx._fold_vc(s.arr, t_arr, (("Array_", 1),) + c1)
            vc = ctx._fold_vc(s.var, t_v, (("Ref", 1),) + c1)
            if wc is not None and vc is not None:
                cands.append((vc, wc))
        adds = {(VarComp(s.var, (("Ref", 1),)),) * 2}
        for vc, wc in cands:
            adds.add(mk_pair(vc, wc))
            for partner in a.pairs_with(wc):
                adds.add(mk_pair(vc, partner))
        for (v1, w1), (v2, w2) in product(cands, cands):
            if mk_pair(w1, w2) in a:
                adds.add(mk_pair(v1, v2))
        return a.union(AliasSet(adds))

    # -- instype -----------------------------------------------------------------
    def transfer_instype(self, s: Instype, a: AliasSet) -> AliasSet:
        out = self.ctx.transfer_eqvar(s.var, s.src, a)
        introduced = len(a.mentions(s.src)) > 0
        if introduced and s.src in self.later_bangs.get(s.point, ()):
            self.diag(INSTYPE_HAZARD, s.point,
                      f"{s.src!r} is used at a more specific type here and "
                      "destructively updated later")
        return out

    # -- case -------------------------------------------------------------------
    def transfer_case(self, s: Case, a: AliasSet) -> AliasSet:
        ctx = self.ctx
        tv = self.types[s.var]
        av = a.mentions(s.var)
        rest = a.difference(av)
        union_out: Optional[AliasSet] = None
        for alt in s.alts:
            dc = alt.pat.cons
            arg_ts = dict(self.u.constructors(self.u.resolve(tv))).get(dc)
            if arg_ts is None:
                raise AnalysisError(f"{self.label(alt.entry_point)}: "
                                    f"constructor {dc} not in type {tv}")
            n = len(arg_ts)
            compat: set = set()
            # compatible scrutinee components and their one-layer preimages
            all_rests: dict = {}
            for i in range(1, n + 1):
                arg_t = arg_ts[i - 1]
                rests = set(self.u.components_of(arg_t)) | {()}
                all_rests[i] = sorted(rests)
            comp_pre: dict = {}
            for i in range(1, n + 1):
                for restc in all_rests[i]:
                    folded = self.u.fc(tv, ((dc, i),) + restc, strict=False)
                    if folded is None:
                        continue
                    compat.add(folded)
                    comp_pre.setdefault(folded, []).append((i, restc))
            avdc = AliasSet(
                p for p in av
                if all(x.var != s.var or x.comp in compat for x in p))
            rself = {(VarComp(rv, (("Ref", 1),)),) * 2
                     for rv in alt.pat.refvars}
            pat_types = {rv: RefT(arg_ts[i])
                         for i, rv in enumerate(alt.pat.refvars)}
            self.types.update(pat_types)

            def ref_vc(i: int, restc):
                rv = alt.pat.refvars[i - 1]
                return ctx._fold_vc(rv, pat_types[rv],
                                    (("Ref", 1),) + restc)

            vishare: set = set()
            share: set = set()
            for p, q in av:
                for x, y in ((p, q), (q, p)):
                    if x.var != s.var:
                        continue
                    for (i, restc) in comp_pre.get(x.comp, ()):
                        xv = ref_vc(i, restc)
                        if xv is None:
                            continue
                        share.add(mk_pair(xv, y))
                        if y.var == s.var:
                            for (j, restc2) in comp_pre.get(y.comp, ()):
                                yv = ref_vc(j, restc2)
                                if yv is not None:
                                    vishare.add(mk_pair(xv, yv))
            entry = rest.union(avdc, AliasSet(rself), AliasSet(vishare),
                               AliasSet(share))
            self.per_point[alt.entry_point] = entry
            branch_out = self.transfer_block(alt.body, entry)
            union_out = branch_out if union_out is None \
                else union_out.union(branch_out)
        out = union_out if union_out is not None else rest
        self.per_point[s.end_point] = out
        return out


def analyze_function(program: Program, fd: FuncDef,
                     options: Options = None) -> FuncResult:
    ctx = AnalysisCtx(program, options)
    return FunctionAnalyzer(ctx, fd).run()


def analyze_program(program: Program, options: Options = None) -> dict:
    """Analyze every function; returns {name: FuncResult}."""
    ctx = AnalysisCtx(program, options)
    return {name: FunctionAnalyzer(ctx, fd).run()
            for name, fd in program.funcs.items()}


def initial_alias_set(program: Program, fd: FuncDef,
                      options: Options = None) -> AliasSet:
    ctx = AnalysisCtx(program, options)
    env = {n: fd.var_types[n] for (n, _t, _m) in fd.params}
    a0, _abs = ctx.lower_condition(fd.pre, env)
    return a0
