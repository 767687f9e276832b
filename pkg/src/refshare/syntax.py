"""Abstract syntax for the core language.

The language is a desugared functional core with mutable references:
every statement binds a fresh variable or destructively updates an
existing reference.  Functions carry sharing signatures (pre- and
postconditions) describing which arguments may alias on entry and what
the result/mutable arguments may alias on exit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Types

UNIT = "Unit"


@dataclass(frozen=True)
class TypeVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Named:
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if self.name == UNIT and not self.args:
            return "()"
        if not self.args:
            return self.name
        return " ".join([self.name] + [_atom_str(a) for a in self.args])


@dataclass(frozen=True)
class RefT:
    target: "Type"

    def __str__(self) -> str:
        return "Ref " + _atom_str(self.target)


@dataclass(frozen=True)
class ArrayT:
    elem: "Type"

    def __str__(self) -> str:
        return "Array " + _atom_str(self.elem)


@dataclass(frozen=True)
class FnT:
    """Function/closure type.

    ``sig`` is the sharing signature of the underlying function (over its
    *full* formal parameter list).  ``closed`` holds the types of closure
    arguments already supplied, most recent first; it is empty for plain
    function types appearing in signatures.
    """

    args: tuple
    result: "Type"
    sig: Optional["SharingSig"] = field(default=None, compare=False, hash=False)
    closed: tuple = ()

    def __str__(self) -> str:
        parts = [_atom_str(a) for a in self.args] + [_atom_str(self.result)]
        return " -> ".join(parts)


@dataclass(eq=False)
class Meta:
    """Unification variable used during local type inference."""

    ident: int
    ref: Optional["Type"] = None

    def __str__(self) -> str:
        return f"?{self.ident}" if self.ref is None else str(self.ref)


Type = Union[TypeVar, Named, RefT, ArrayT, FnT, Meta]


def _atom_str(t: Type) -> str:
    s = str(t)
    if " " in s and not (s.startswith("(") and s.endswith(")")):
        return f"({s})"
    return s


INT = Named("Int")
BOOL = Named("Bool")
UNIT_T = Named(UNIT)


# ---------------------------------------------------------------------------
# Data definitions

@dataclass(frozen=True)
class ConsDef:
    name: str
    arg_types: tuple  # of Type, possibly mentioning the DataDef's params


@dataclass(frozen=True)
class DataDef:
    name: str
    params: tuple  # of str
    constructors: tuple  # of ConsDef


BUILTIN_DATA = {
    "Bool": DataDef("Bool", (), (ConsDef("True", ()), ConsDef("False", ()))),
    UNIT: DataDef(UNIT, (), (ConsDef("()", ()),)),
    "Int": DataDef("Int", (), ()),  # atomic: no user-visible constructors
}


# ---------------------------------------------------------------------------
# Sharing conditions

@dataclass(frozen=True)
class CStarEq:
    """Condition statement ``*^m lhs = *^n rhs``.

    ``rhs`` may be the reserved word ``abstract`` meaning the whole value
    may alias externally owned data of the same type.
    """

    stars_l: int
    lhs: str
    stars_r: int
    rhs: str  # variable name or "abstract"


@dataclass(frozen=True)
class CDC:
    """Condition statement ``v = Cons a b`` relating a variable and parts."""

    var: str
    cons: str
    args: tuple  # of str (variable names)


CondStmt = Union[CStarEq, CDC]


@dataclass(frozen=True)
class Cond:
    """A pre- or postcondition: a (possibly empty) statement list or an
    explicit alias set supplied programmatically."""

    stmts: tuple = ()
    explicit: Optional[frozenset] = None  # of canonical pairs (see aliasset)

    @staticmethod
    def nosharing() -> "Cond":
        return Cond(())


@dataclass(frozen=True)
class SharingSig:
    """Sharing signature of a function value.

    ``params`` lists (name, mutable) for the full formal parameter list;
    the first ``n_closed`` of them are closure arguments already supplied.
    The result is referred to as ``ret`` in conditions.
    """

    params: tuple  # of (str, bool)
    pre: Cond
    post: Cond
    n_closed: int = 0


RESULT_VAR = "ret"


# ---------------------------------------------------------------------------
# Statements

@dataclass(frozen=True)
class VarArg:
    name: str


@dataclass(frozen=True)
class IntArg:
    value: int


@dataclass(frozen=True)
class ConsArg:
    name: str


Arg = Union[VarArg, IntArg, ConsArg]


@dataclass
class StmtBase:
    point: int = field(default=-1, init=False)


@dataclass
class EqVar(StmtBase):       # v = w
    var: str
    src: str


@dataclass
class EqDeref(StmtBase):     # v = *w
    var: str
    src: str


@dataclass
class DerefEq(StmtBase):     # *v = w   (binds fresh reference v)
    var: str
    src: Arg


@dataclass
class Bind(StmtBase):        # v = Cons a b | v = Nil | v = 42
    var: str
    cons: Optional[str]      # None for integer literals
    args: tuple = ()
    value: Optional[int] = None


@dataclass
class Assign(StmtBase):      # *!v := w !a!b
    var: str
    src: Arg
    bangs: frozenset = frozenset()


@dataclass
class App(StmtBase):         # v = f a1 a2 !x!y
    var: str
    fn: str
    args: tuple = ()
    bangs: frozenset = frozenset()
    inst: Optional["AppInst"] = None  # filled in by the type checker


@dataclass
class ArrayRef(StmtBase):    # v = arrayref a i
    var: str
    arr: str
    idx: Arg


@dataclass
class Instype(StmtBase):     # v = w :: T
    var: str
    src: str
    ty: Type = UNIT_T


@dataclass
class Pat:
    cons: str
    refvars: tuple = ()      # pattern args are bound as references


@dataclass
class Alt:
    pat: Pat
    body: list
    entry_point: int = -1


@dataclass
class Case(StmtBase):        # case v { ... }
    var: str
    alts: list = field(default_factory=list)
    end_point: int = -1


@dataclass
class ErrorStmt(StmtBase):
    pass


Stmt = Union[EqVar, EqDeref, DerefEq, Bind, Assign, App, ArrayRef, Instype,
             Case, ErrorStmt]


@dataclass
class AppInst:
    """Call-site instantiation attached to an App by the type checker."""

    sig: SharingSig
    formal_types: tuple      # instantiated types of the full formal list
    result_type: Type
    n_closed: int            # closure args already held by the callee value
    remaining: int           # formals not yet supplied before this App
    fn_is_value: bool        # True when fn is a local variable (closure)
    fn_name: Optional[str]   # underlying program function, if known


@dataclass
class FuncDef:
    name: str
    params: list             # of (name, Type, mutable)
    result_type: Type
    pre: Cond
    post: Cond
    body: list               # of Stmt
    # filled in by later passes:
    var_types: dict = field(default_factory=dict)
    max_point: int = 0

    @property
    def sig(self) -> SharingSig:
        return SharingSig(tuple((n, m) for (n, _t, m) in self.params),
                          self.pre, self.post)


@dataclass
class Program:
    datadefs: dict           # name -> DataDef (includes builtins)
    synonyms: dict           # name -> Type
    funcs: dict              # name -> FuncDef
    constructors: dict = field(default_factory=dict)  # cons -> (type name, index)

    def __post_init__(self):
        if not self.constructors:
            for dd in self.datadefs.values():
                for cd in dd.constructors:
                    self.constructors[cd.name] = (dd.name, cd)


def stmt_bangs(s: Stmt) -> frozenset:
    if isinstance(s, Assign):
        return s.bangs
    if isinstance(s, App):
        return s.bangs
    return frozenset()


def iter_points(body: list):
    """Yield (point, stmt-or-alt-marker) in source order."""
    for s in body:
        if isinstance(s, Case):
            for alt in s.alts:
                yield alt.entry_point, ("alt", s, alt)
                yield from iter_points(alt.body)
            yield s.end_point, ("end", s, None)
        else:
            yield s.point, ("stmt", s, None)


# ---------------------------------------------------------------------------
# Pretty printing (round-trips through the parser)

def type_str(t: Type) -> str:
    return str(t)


def _arg_str(a: Arg) -> str:
    if isinstance(a, VarArg):
        return a.name
    if isinstance(a, IntArg):
        return str(a.value)
    return a.name if a.name != "()" else "()"


def _cond_str(c: Cond) -> str:
    if c.explicit is not None:
        raise ValueError("explicit conditions have no surface syntax")
    if not c.stmts:
        return "nosharing"
    out = []
    for st in c.stmts:
        if isinstance(st, CStarEq):
            out.append("*" * st.stars_l + st.lhs + " = " + "*" * st.stars_r + st.rhs)
        else:
            out.append(st.var + " = " + " ".join([st.cons] + list(st.args)))
    return "; ".join(out)


def stmt_lines(s: Stmt, indent: int) -> list:
    pad = "  " * indent
    if isinstance(s, EqVar):
        return [pad + f"{s.var} = {s.src}"]
    if isinstance(s, EqDeref):
        return [pad + f"{s.var} = *{s.src}"]
    if isinstance(s, DerefEq):
        return [pad + f"*{s.var} = {_arg_str(s.src)}"]
    if isinstance(s, Bind):
        if s.cons is None:
            return [pad + f"{s.var} = {s.value}"]
        rhs = " ".join([s.cons if s.cons != '()' else '()'] + [_arg_str(a) for a in s.args])
        return [pad + f"{s.var} = {rhs}"]
    if isinstance(s, Assign):
        bangs = "".join("!" + b for b in sorted(s.bangs - {s.var}))
        head = f"*!{s.var}" if s.var in s.bangs else f"*{s.var}"
        tail = f" {bangs}" if bangs else ""
        return [pad + f"{head} := {_arg_str(s.src)}{tail}"]
    if isinstance(s, App):
        bangs = "".join("!" + b for b in sorted(s.bangs))
        parts = [s.fn] + [_arg_str(a) for a in s.args]
        tail = f" {bangs}" if bangs else ""
        return [pad + f"{s.var} = " + " ".join(parts) + tail]
    if isinstance(s, ArrayRef):
        return [pad + f"{s.var} = arrayref {s.arr} {_arg_str(s.idx)}"]
    if isinstance(s, Instype):
        return [pad + f"{s.var} = {s.src} :: {type_str(s.ty)}"]
    if isinstance(s, ErrorStmt):
        return [pad + "error"]
    if isinstance(s, Case):
        lines = [pad + f"case {s.var} {{"]
        for alt in s.alts:
            head = " ".join([alt.pat.cons] + ["*" + v for v in alt.pat.refvars])
            lines.append(pad + "  " + head + " -> {")
            for b in alt.body:
                lines.extend(stmt_lines(b, indent + 2))
            lines.append(pad + "  }")
        lines.append(pad + "}")
        return lines
    raise TypeError(s)


def program_str(p: Program) -> str:
    lines = []
    for dd in p.datadefs.values():
        if dd.name in BUILTIN_DATA:
            continue
        alts = " | ".join(
            " ".join([cd.name] + [_atom_str(t) for t in cd.arg_types])
            for cd in dd.constructors)
        lines.append(f"data {dd.name}" +
                     ("".join(" " + v for v in dd.params)) + f" = {alts}")
    for name, t in p.synonyms.items():
        lines.append(f"type {name} = {type_str(t)}")
    for fd in p.funcs.values():
        ps = ", ".join(("!" if m else "") + n + ": " + type_str(t)
                       for (n, t, m) in fd.params)
        lines.append("")
        lines.append(f"fn {fd.name} ({ps}) -> {type_str(fd.result_type)}")
        lines.append(f"  pre {_cond_str(fd.pre)}")
        lines.append(f"  post {_cond_str(fd.post)}")
        lines.append("{")
        for s in fd.body:
            lines.extend(stmt_lines(s, 1))
        lines.append("}")
    return "\n".join(lines) + "\n"
