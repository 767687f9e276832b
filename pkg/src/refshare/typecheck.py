"""Type checking and local type inference.

Responsibilities:

* validate data definitions and type synonyms (rejecting cyclic
  synonyms, which includes infinite reference chains like
  ``type Refs = Ref Refs``);
* check each function body, inferring types for local variables;
* replace signature type variables by ``Ref ()`` inside the definition
  (the analysis needs fully instantiated types; a one-component
  reference is the most general shape a value can take);
* annotate each application with the call-site instantiation of the
  callee's signature (types of all formals, mutability, remaining
  arity) for use by the sharing analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    App, AppInst, ArrayRef, ArrayT, Assign, Bind, Case, Cond, ConsArg,
    CStarEq, DerefEq, EqDeref, EqVar, ErrorStmt, FnT, FuncDef, IntArg,
    Instype, Meta, Named, Program, RefT, RESULT_VAR, SharingSig, TypeVar,
    VarArg, INT, BOOL, UNIT_T,
)


class TypeErr(Exception):
    pass


BUILTIN_FUNCS = {
    "le": FuncDef("le", [("a", INT, False), ("b", INT, False)], BOOL,
                  Cond.nosharing(), Cond.nosharing(), []),
}


def fn_type(fd: FuncDef) -> FnT:
    return FnT(tuple(t for (_n, t, _m) in fd.params), fd.result_type,
               sig=fd.sig, closed=())


def default_fn_sig(n_params: int) -> SharingSig:
    """Signature assumed for bare arrow types: nothing is updated, and
    both arguments and result may share with abstract data."""
    names = tuple(f"w{i + 1}" for i in range(n_params))
    pre = Cond(tuple(CStarEq(0, n, 0, "abstract") for n in names))
    post = Cond((CStarEq(0, RESULT_VAR, 0, "abstract"),))
    return SharingSig(tuple((n, False) for n in names), pre, post)


class Checker:
    def __init__(self, program: Program):
        self.program = program
        self._meta_count = 0

    # -- type plumbing -------------------------------------------------------
    def fresh(self) -> Meta:
        self._meta_count += 1
        return Meta(self._meta_count)

    def resolve(self, t):
        while isinstance(t, Meta) and t.ref is not None:
            t = t.ref
        if isinstance(t, Named) and t.name in self.program.synonyms:
            return self.resolve(self.expand_synonym(t.name))
        return t

    def expand_synonym(self, name: str, _seen=None):
        seen = set() if _seen is None else _seen
        if name in seen:
            raise TypeErr(f"cyclic type synonym {name!r}")
        seen.add(name)
        t = self.program.synonyms[name]
        if isinstance(t, Named) and t.name in self.program.synonyms:
            return self.expand_synonym(t.name, seen)
        return t

    def check_synonyms(self):
        for name, t in self.program.synonyms.items():
            self._expand_deep(t, frozenset({name}))

    def _expand_deep(self, t, seen: frozenset):
        t0 = t
        while isinstance(t0, Named) and t0.name in self.program.synonyms:
            if t0.name in seen:
                raise TypeErr(f"cyclic type synonym {t0.name!r} "
                              "(infinite type rejected)")
            seen = seen | {t0.name}
            t0 = self.program.synonyms[t0.name]
        for sub in _children(t0):
            self._expand_deep(sub, seen)

    def unify(self, a, b):
        a, b = self.resolve(a), self.resolve(b)
        if a is b:
            return
        if isinstance(a, Meta):
            if self._occurs(a, b):
                raise TypeErr(f"infinite type: {a} in {b}")
            a.ref = b
            return
        if isinstance(b, Meta):
            return self.unify(b, a)
        if isinstance(a, TypeVar) and isinstance(b, TypeVar) and a == b:
            return
        if isinstance(a, Named) and isinstance(b, Named):
            if a.name != b.name or len(a.args) != len(b.args):
                raise TypeErr(f"type mismatch: {a} vs {b}")
            for x, y in zip(a.args, b.args):
                self.unify(x, y)
            return
        if isinstance(a, RefT) and isinstance(b, RefT):
            return self.unify(a.target, b.target)
        if isinstance(a, ArrayT) and isinstance(b, ArrayT):
            return self.unify(a.elem, b.elem)
        if isinstance(a, FnT) and isinstance(b, FnT):
            if len(a.args) != len(b.args):
                raise TypeErr(f"type mismatch: {a} vs {b}")
            for x, y in zip(a.args, b.args):
                self.unify(x, y)
            return self.unify(a.result, b.result)
        raise TypeErr(f"type mismatch: {a} vs {b}")

    def _occurs(self, m: Meta, t) -> bool:
        t = self.resolve(t)
        if t is m:
            return True
        return any(self._occurs(m, c) for c in _children(t))

    def instantiate(self, t, mapping: dict):
        t = self.resolve(t)
        if isinstance(t, TypeVar):
            if t.name not in mapping:
                mapping[t.name] = self.fresh()
            return mapping[t.name]
        if isinstance(t, Named):
            return Named(t.name, tuple(self.instantiate(a, mapping)
                                       for a in t.args))
        if isinstance(t, RefT):
            return RefT(self.instantiate(t.target, mapping))
        if isinstance(t, ArrayT):
            return ArrayT(self.instantiate(t.elem, mapping))
        if isinstance(t, FnT):
            return FnT(tuple(self.instantiate(a, mapping) for a in t.args),
                       self.instantiate(t.result, mapping), t.sig,
                       tuple(self.instantiate(a, mapping) for a in t.closed))
        return t

    def zonk(self, t):
        t = self.resolve(t)
        if isinstance(t, Meta):
            return RefT(UNIT_T)  # residual type variable: most general shape
        if isinstance(t, TypeVar):
            return RefT(UNIT_T)
        if isinstance(t, Named):
            return Named(t.name, tuple(self.zonk(a) for a in t.args))
        if isinstance(t, RefT):
            return RefT(self.zonk(t.target))
        if isinstance(t, ArrayT):
            return ArrayT(self.zonk(t.elem))
        if isinstance(t, FnT):
            return FnT(tuple(self.zonk(a) for a in t.args),
                       self.zonk(t.result), t.sig,
                       tuple(self.zonk(a) for a in t.closed))
        return t

    # -- validation of declared types -----------------------------------------
    def validate_type(self, t, tvars_ok=True):
        t = self.resolve(t)
        if isinstance(t, TypeVar):
            if not tvars_ok:
                raise TypeErr(f"unexpected type variable {t}")
            return
        if isinstance(t, Named):
            dd = self.program.datadefs.get(t.name)
            if dd is None:
                raise TypeErr(f"unknown type {t.name!r}")
            if len(t.args) != len(dd.params):
                raise TypeErr(f"type {t.name} expects {len(dd.params)} "
                              f"argument(s), got {len(t.args)}")
        for sub in _children(t):
            self.validate_type(sub, tvars_ok)

    def check_datadefs(self):
        seen_cons = {}
        for dd in self.program.datadefs.values():
            for cd in dd.constructors:
                if cd.name in seen_cons and seen_cons[cd.name] != dd.name:
                    raise TypeErr(f"constructor {cd.name!r} defined in both "
                                  f"{seen_cons[cd.name]} and {dd.name}")
                seen_cons[cd.name] = dd.name
                for at in cd.arg_types:
                    self.validate_type(at)
                    for v in _tvars(at):
                        if v not in dd.params:
                            raise TypeErr(
                                f"unbound type variable {v!r} in {dd.name}")

    # -- statements -----------------------------------------------------------
    def arg_type(self, env: dict, a, where: str):
        if isinstance(a, IntArg):
            return INT
        if isinstance(a, VarArg):
            if a.name not in env:
                raise TypeErr(f"{where}: unbound variable {a.name!r}")
            return env[a.name]
        # nullary constructor constant
        info = self.program.constructors.get(a.name)
        if info is None:
            raise TypeErr(f"{where}: unknown constructor {a.name!r}")
        tyname, cd = info
        if cd.arg_types:
            raise TypeErr(f"{where}: constructor {a.name} expects arguments")
        dd = self.program.datadefs[tyname]
        mapping: dict = {}
        return self.instantiate(Named(tyname, tuple(TypeVar(p)
                                                    for p in dd.params)),
                                mapping)

    def bind(self, env: dict, var: str, t, where: str):
        if var in env:
            raise TypeErr(f"{where}: variable {var!r} is already bound")
        env[var] = t
        self._bindings[var] = t

    def check_stmt(self, fd: FuncDef, env: dict, s) -> None:
        w = f"{fd.name}:{getattr(s, 'point', '?')}"
        if isinstance(s, EqVar):
            if s.src not in env:
                raise TypeErr(f"{w}: unbound variable {s.src!r}")
            self.bind(env, s.var, env[s.src], w)
        elif isinstance(s, EqDeref):
            if s.src not in env:
                raise TypeErr(f"{w}: unbound variable {s.src!r}")
            inner = self.fresh()
            self.unify(env[s.src], RefT(inner))
            self.bind(env, s.var, inner, w)
        elif isinstance(s, DerefEq):
            self.bind(env, s.var, RefT(self.arg_type(env, s.src, w)), w)
        elif isinstance(s, Bind):
            if s.cons is None:
                self.bind(env, s.var, INT, w)
                return
            info = self.program.constructors.get(s.cons)
            if info is None:
                raise TypeErr(f"{w}: unknown constructor {s.cons!r}")
            tyname, cd = info
            if len(cd.arg_types) != len(s.args):
                raise TypeErr(f"{w}: constructor {s.cons} expects "
                              f"{len(cd.arg_types)} argument(s)")
            dd = self.program.datadefs[tyname]
            mapping: dict = {}
            res = self.instantiate(Named(tyname, tuple(TypeVar(p)
                                                       for p in dd.params)),
                                   mapping)
            for at, a in zip(cd.arg_types, s.args):
                self.unify(self.instantiate(at, mapping),
                           self.arg_type(env, a, w))
            self.bind(env, s.var, res, w)
        elif isinstance(s, Assign):
            if s.var not in env:
                raise TypeErr(f"{w}: unbound variable {s.var!r}")
            self.unify(env[s.var], RefT(self.arg_type(env, s.src, w)))
            for b in s.bangs:
                if b not in env:
                    raise TypeErr(f"{w}: unbound variable {b!r} in ! list")
        elif isinstance(s, App):
            self.check_app(fd, env, s, w)
        elif isinstance(s, ArrayRef):
            if s.arr not in env:
                raise TypeErr(f"{w}: unbound variable {s.arr!r}")
            elem = self.fresh()
            self.unify(env[s.arr], ArrayT(elem))
            self.unify(self.arg_type(env, s.idx, w), INT)
            self.bind(env, s.var, RefT(elem), w)
        elif isinstance(s, Instype):
            if s.src not in env:
                raise TypeErr(f"{w}: unbound variable {s.src!r}")
            self.validate_type(s.ty, tvars_ok=False)
            if not self.instance_of(env[s.src], s.ty):
                raise TypeErr(f"{w}: {s.ty} is not an instance of the type "
                              f"of {s.src!r}")
            self.bind(env, s.var, s.ty, w)
        elif isinstance(s, Case):
            self.check_case(fd, env, s, w)
        elif isinstance(s, ErrorStmt):
            pass
        else:
            raise TypeErr(f"{w}: unknown statement {s!r}")

    def instance_of(self, general, specific) -> bool:
        """Does ``specific`` match ``general`` with unbound metas/type
        variables in ``general`` acting as wildcards (no binding)?"""
        g, sp = self.resolve(general), self.resolve(specific)
        if isinstance(g, (Meta, TypeVar)):
            return True
        if type(g) is not type(sp):
            return False
        if isinstance(g, Named):
            return (g.name == sp.name and len(g.args) == len(sp.args) and
                    all(self.instance_of(x, y)
                        for x, y in zip(g.args, sp.args)))
        if isinstance(g, RefT):
            return self.instance_of(g.target, sp.target)
        if isinstance(g, ArrayT):
            return self.instance_of(g.elem, sp.elem)
        if isinstance(g, FnT):
            return (len(g.args) == len(sp.args) and
                    all(self.instance_of(x, y)
                        for x, y in zip(g.args, sp.args)) and
                    self.instance_of(g.result, sp.result))
        return g == sp

    def check_app(self, fd: FuncDef, env: dict, s: App, w: str):
        if s.fn in env:
            ft = self.resolve(env[s.fn])
            fn_is_value, fn_name = True, None
        elif s.fn in self.program.funcs:
            ft = self.instantiate(fn_type(self.program.funcs[s.fn]), {})
            fn_is_value, fn_name = False, s.fn
        elif s.fn in BUILTIN_FUNCS:
            ft = self.instantiate(fn_type(BUILTIN_FUNCS[s.fn]), {})
            fn_is_value, fn_name = False, s.fn
        else:
            raise TypeErr(f"{w}: unknown function {s.fn!r}")
        if not isinstance(ft, FnT):
            raise TypeErr(f"{w}: {s.fn!r} is not a function (type {ft})")
        n = len(s.args)
        if n == 0:
            raise TypeErr(f"{w}: application needs at least one argument")
        if n > len(ft.args):
            raise TypeErr(f"{w}: too many arguments for {s.fn!r}")
        for formal_t, a in zip(ft.args, s.args):
            self.unify(formal_t, self.arg_type(env, a, w))
        k = len(ft.closed)
        if n == len(ft.args):
            res = ft.result
        else:
            new_closed = tuple(reversed(ft.args[:n])) + ft.closed
            res = FnT(ft.args[n:], ft.result, ft.sig, new_closed)
        self.bind(env, s.var, res, w)
        sig = ft.sig or default_fn_sig(k + len(ft.args))
        full_formal_types = tuple(reversed(ft.closed)) + ft.args
        if len(sig.params) != len(full_formal_types):
            raise TypeErr(f"{w}: signature of {s.fn!r} has "
                          f"{len(sig.params)} formals but type has "
                          f"{len(full_formal_types)}")
        for b in s.bangs:
            if b not in env:
                raise TypeErr(f"{w}: unbound variable {b!r} in ! list")
        s.inst = AppInst(sig=sig, formal_types=full_formal_types,
                         result_type=ft.result, n_closed=k,
                         remaining=len(ft.args), fn_is_value=fn_is_value,
                         fn_name=fn_name)

    def check_case(self, fd: FuncDef, env: dict, s: Case, w: str):
        if s.var not in env:
            raise TypeErr(f"{w}: unbound variable {s.var!r}")
        tv = self.resolve(env[s.var])
        branch_envs = []
        for alt in s.alts:
            info = self.program.constructors.get(alt.pat.cons)
            if info is None:
                raise TypeErr(f"{w}: unknown constructor {alt.pat.cons!r}")
            tyname, cd = info
            dd = self.program.datadefs[tyname]
            mapping: dict = {}
            scrut_t = self.instantiate(
                Named(tyname, tuple(TypeVar(p) for p in dd.params)), mapping)
            self.unify(tv, scrut_t)
            if len(cd.arg_types) != len(alt.pat.refvars):
                raise TypeErr(f"{w}: pattern {alt.pat.cons} expects "
                              f"{len(cd.arg_types)} argument(s)")
            benv = dict(env)
            for v, at in zip(alt.pat.refvars, cd.arg_types):
                self.bind(benv, v, RefT(self.instantiate(at, mapping)), w)
            for b in alt.body:
                self.check_stmt(fd, benv, b)
            ends_in_error = bool(alt.body) and isinstance(alt.body[-1],
                                                          ErrorStmt)
            branch_envs.append((benv, ends_in_error))
        live_envs = [e for (e, err) in branch_envs if not err] or \
                    [e for (e, _err) in branch_envs]
        # variables bound in every (non-error) branch stay in scope
        common = set.intersection(*(set(e) for e in live_envs)) if live_envs \
            else set(env)
        for name in common - set(env):
            t0 = live_envs[0][name]
            for e in live_envs[1:]:
                self.unify(t0, e[name])
            env[name] = t0

    # -- functions --------------------------------------------------------------
    def check_fn(self, fd: FuncDef):
        # Signature type variables stay rigid while checking the body
        # (so an Instype can instantiate them); zonk later maps them to
        # Ref (), the one-component stand-in for "any type".
        for (_n, t, _m) in fd.params:
            self.validate_type(t)
        self.validate_type(fd.result_type)
        env: dict = {}
        self._bindings = {}
        for (name, t, _m) in fd.params:
            if name in env:
                raise TypeErr(f"{fd.name}: duplicate parameter {name!r}")
            env[name] = t
            self._bindings[name] = t
        for s in fd.body:
            self.check_stmt(fd, env, s)
        body_errors = bool(fd.body) and isinstance(fd.body[-1], ErrorStmt)
        if RESULT_VAR not in env:
            if not body_errors:
                raise TypeErr(f"{fd.name}: result variable "
                              f"{RESULT_VAR!r} is never bound")
        else:
            self.unify(env[RESULT_VAR], fd.result_type)
        fd.var_types = {v: self.zonk(t) for v, t in self._bindings.items()}
        self._zonk_insts(fd.body)

    def _zonk_insts(self, body):
        for s in body:
            if isinstance(s, App) and s.inst is not None:
                s.inst.formal_types = tuple(self.zonk(t)
                                            for t in s.inst.formal_types)
                s.inst.result_type = self.zonk(s.inst.result_type)
            elif isinstance(s, Case):
                for alt in s.alts:
                    self._zonk_insts(alt.body)


def check_types(program: Program) -> None:
    """Type-check ``program`` in place, raising TypeErr on failure.

    On success every FuncDef has ``var_types`` (fully instantiated types
    for parameters, locals and pattern variables) and every App carries
    its call-site instantiation."""
    ck = Checker(program)
    ck.check_synonyms()
    ck.check_datadefs()
    for fd in program.funcs.values():
        for (_n, t, _m) in fd.params:
            ck.validate_type(t)
        ck.validate_type(fd.result_type)
    for fd in program.funcs.values():
        ck.check_fn(fd)


def _children(t):
    if isinstance(t, Named):
        return t.args
    if isinstance(t, RefT):
        return (t.target,)
    if isinstance(t, ArrayT):
        return (t.elem,)
    if isinstance(t, FnT):
        return t.args + (t.result,) + t.closed
    return ()


def _tvars(t):
    if isinstance(t, TypeVar):
        return {t.name}
    out: set = set()
    for c in _children(t):
        out |= _tvars(c)
    return out


