"""Tokenizer and recursive-descent parser for the core language.

Surface form (one statement per line, ``--`` comments):

    data Name p1 p2 = Cons1 T1 T2 | Cons2
    type Name = T
    fn name (x: T, !y: Ref T) -> T
      pre <cond>
      post <cond>
    {
      v = w
      v = *w
      *v = w
      v = Cons v1 v2
      *!v := w !a!b
      v = f v1 v2 !a!b
      v = arrayref a i
      v = w :: T
      case v { Cons *a *b -> { ... } Nil -> { ... } }
      error
    }

Conditions are ``nosharing``, ``x = abstract`` or a ``;``-separated list
of binding statements (``*p = v``, ``**a = **b``, ``v = Pair a b``).

Program points are numbered in source order while parsing: each simple
statement gets a point, each case alternative gets an entry point, and
each case gets a final point after its alternatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Alt, App, ArrayRef, Assign, Bind, BUILTIN_DATA, Case, Cond, ConsArg,
    ConsDef, CStarEq, CDC, DataDef, DerefEq, EqDeref, EqVar, ErrorStmt,
    FuncDef, FnT, IntArg, Instype, Named, Pat, Program, RefT, ArrayT,
    TypeVar, VarArg,
)


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


@dataclass
class Tok:
    kind: str
    text: str
    line: int


_TOKEN_RE = re.compile(r"""
    (?P<comment>--[^\n]*)
  | (?P<nl>\n)
  | (?P<ws>[ \t\r]+)
  | (?P<unit>\(\))
  | (?P<arrow>->)
  | (?P<assign>:=)
  | (?P<dcolon>::)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[(){},;:*!=|])
""", re.VERBOSE)

KEYWORDS = {"fn", "data", "type", "case", "error", "pre", "post",
            "nosharing", "abstract", "arrayref"}


def tokenize(text: str):
    toks = []
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        pos = m.end()
        kind = m.lastgroup
        if kind in ("comment", "ws"):
            continue
        if kind == "nl":
            toks.append(Tok("NL", "\n", line))
            line += 1
            continue
        val = m.group()
        if kind == "ident":
            toks.append(Tok(val if val in KEYWORDS else "IDENT", val, line))
        elif kind == "int":
            toks.append(Tok("INT", val, line))
        elif kind == "unit":
            toks.append(Tok("UNIT", "()", line))
        elif kind in ("arrow", "assign", "dcolon"):
            toks.append(Tok(kind, val, line))
        else:
            toks.append(Tok(val, val, line))
    toks.append(Tok("EOF", "", line))
    return toks


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.point = 0

    # -- token helpers ------------------------------------------------------
    def peek(self, skip_nl: bool = False) -> Tok:
        j = self.i
        if skip_nl:
            while self.toks[j].kind == "NL":
                j += 1
        return self.toks[j]

    def next(self, skip_nl: bool = False) -> Tok:
        if skip_nl:
            self.skip_nl()
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def skip_nl(self):
        while self.toks[self.i].kind == "NL":
            self.i += 1

    def expect(self, kind: str, skip_nl: bool = False) -> Tok:
        t = self.next(skip_nl)
        if t.kind != kind:
            raise ParseError(f"expected {kind!r}, got {t.text!r}", t.line)
        return t

    def accept(self, kind: str, skip_nl: bool = False) -> bool:
        if self.peek(skip_nl).kind == kind:
            if skip_nl:
                self.skip_nl()
            self.i += 1
            return True
        return False

    # -- types --------------------------------------------------------------
    def parse_type(self):
        parts = [self.parse_type_app()]
        while self.accept("arrow"):
            parts.append(self.parse_type_app())
        t = parts[-1]
        for a in reversed(parts[:-1]):
            if isinstance(t, FnT) and t.sig is None:
                t = FnT((a,) + t.args, t.result)
            else:
                t = FnT((a,), t)
        return t

    def parse_type_app(self):
        t = self.peek()
        if t.kind == "IDENT" and t.text[0].isupper():
            name = self.next().text
            args = []
            while self._type_atom_ahead():
                args.append(self.parse_type_atom())
            if name == "Ref":
                if len(args) != 1:
                    raise ParseError("Ref takes one type argument", t.line)
                return RefT(args[0])
            if name == "Array":
                if len(args) != 1:
                    raise ParseError("Array takes one type argument", t.line)
                return ArrayT(args[0])
            return Named(name, tuple(args))
        return self.parse_type_atom()

    def _type_atom_ahead(self) -> bool:
        k = self.peek()
        return (k.kind in ("UNIT", "(") or
                (k.kind == "IDENT"))

    def parse_type_atom(self):
        t = self.peek()
        if t.kind == "UNIT":
            self.next()
            return Named("Unit")
        if t.kind == "(":
            self.next()
            inner = self.parse_type()
            self.expect(")")
            return inner
        if t.kind == "IDENT":
            name = self.next().text
            if name[0].isupper():
                if name == "Ref" or name == "Array":
                    raise ParseError(f"{name} needs a type argument", t.line)
                return Named(name)
            return TypeVar(name)
        raise ParseError(f"expected type, got {t.text!r}", t.line)

    # -- top level ----------------------------------------------------------
    def parse_program(self) -> Program:
        datadefs = dict(BUILTIN_DATA)
        synonyms = {}
        funcs = {}
        while True:
            t = self.peek(skip_nl=True)
            if t.kind == "EOF":
                break
            if t.kind == "data":
                dd = self.parse_data()
                if dd.name in datadefs:
                    raise ParseError(f"duplicate type {dd.name}", t.line)
                datadefs[dd.name] = dd
            elif t.kind == "type":
                self.next(skip_nl=True)
                name = self.expect("IDENT").text
                self.expect("=")
                synonyms[name] = self.parse_type()
            elif t.kind == "fn":
                fd = self.parse_fn()
                if fd.name in funcs:
                    raise ParseError(f"duplicate function {fd.name}", t.line)
                funcs[fd.name] = fd
            else:
                raise ParseError(f"expected declaration, got {t.text!r}", t.line)
        return Program(datadefs, synonyms, funcs)

    def parse_data(self) -> DataDef:
        self.expect("data", skip_nl=True)
        name = self.expect("IDENT").text
        params = []
        while self.peek().kind == "IDENT" and self.peek().text[0].islower():
            params.append(self.next().text)
        self.expect("=")
        constructors = []
        while True:
            cname = self.expect("IDENT").text
            args = []
            while self._type_atom_ahead() or self.peek().kind == "UNIT":
                args.append(self.parse_type_atom())
            constructors.append(ConsDef(cname, tuple(args)))
            if not self.accept("|", skip_nl=True):
                break
        return DataDef(name, tuple(params), tuple(constructors))

    def parse_fn(self) -> FuncDef:
        self.expect("fn", skip_nl=True)
        name = self.expect("IDENT").text
        params = []
        if self.accept("UNIT"):
            pass
        elif self.expect("(") and not self.accept(")"):
            while True:
                mut = self.accept("!", skip_nl=True)
                pname = self.expect("IDENT", skip_nl=True).text
                self.expect(":")
                ptype = self.parse_type()
                params.append((pname, ptype, mut))
                if self.accept(","):
                    continue
                self.expect(")", skip_nl=True)
                break
        self.expect("arrow", skip_nl=True)
        rtype = self.parse_type()
        self.expect("pre", skip_nl=True)
        pre = self.parse_cond(("post",))
        self.expect("post", skip_nl=True)
        post = self.parse_cond(("{",))
        self.point = 0
        body = self.parse_block()
        fd = FuncDef(name, params, rtype, pre, post, body)
        fd.max_point = self.point
        return fd

    # -- conditions ----------------------------------------------------------
    def parse_cond(self, stop) -> Cond:
        if self.accept("nosharing", skip_nl=True):
            return Cond.nosharing()
        stmts = []
        while True:
            stmts.append(self.parse_cond_stmt())
            if self.accept(";", skip_nl=True):
                continue
            t = self.peek(skip_nl=True)
            if t.kind in stop:
                break
            raise ParseError(f"unexpected {t.text!r} in condition", t.line)
        return Cond(tuple(stmts))

    def parse_cond_stmt(self):
        self.skip_nl()
        stars_l = 0
        while self.accept("*"):
            stars_l += 1
        lhs = self.expect("IDENT").text
        self.expect("=")
        if self.accept("abstract"):
            if stars_l:
                return CStarEq(stars_l, lhs, 0, "abstract")
            return CStarEq(0, lhs, 0, "abstract")
        stars_r = 0
        while self.accept("*"):
            stars_r += 1
        t = self.peek()
        if stars_r == 0 and t.kind == "IDENT" and t.text[0].isupper():
            cons = self.next().text
            args = []
            while self.peek().kind == "IDENT" and self.peek().text[0].islower():
                args.append(self.next().text)
            return CDC(lhs, cons, tuple(args))
        rhs = self.expect("IDENT").text
        return CStarEq(stars_l, lhs, stars_r, rhs)

    # -- statements ----------------------------------------------------------
    def next_point(self) -> int:
        self.point += 1
        return self.point

    def parse_block(self) -> list:
        self.expect("{", skip_nl=True)
        body = []
        while True:
            if self.accept("}", skip_nl=True):
                break
            body.append(self.parse_stmt())
        return body

    def parse_arg(self):
        t = self.peek()
        if t.kind == "INT":
            return IntArg(int(self.next().text))
        if t.kind == "UNIT":
            self.next()
            return ConsArg("()")
        if t.kind == "IDENT":
            name = self.next().text
            return ConsArg(name) if name[0].isupper() else VarArg(name)
        raise ParseError(f"expected argument, got {t.text!r}", t.line)

    def _arg_ahead(self) -> bool:
        return self.peek().kind in ("INT", "UNIT", "IDENT")

    def parse_bangs(self) -> frozenset:
        names = set()
        while self.accept("!"):
            names.add(self.expect("IDENT").text)
        return frozenset(names)

    def parse_stmt(self):
        self.skip_nl()
        t = self.peek()
        if t.kind == "error":
            self.next()
            s = ErrorStmt()
            s.point = self.next_point()
            return s
        if t.kind == "case":
            return self.parse_case()
        if t.kind == "*":
            return self.parse_star_stmt()
        if t.kind != "IDENT" or not t.text[0].islower():
            raise ParseError(f"expected statement, got {t.text!r}", t.line)
        var = self.next().text
        self.expect("=")
        s = self.parse_rhs(var)
        s.point = self.next_point()
        return s

    def parse_star_stmt(self):
        self.expect("*")
        banged = self.accept("!")
        var = self.expect("IDENT").text
        t = self.peek()
        if t.kind == "assign":
            self.next()
            src = self.parse_arg()
            bangs = self.parse_bangs() | ({var} if banged else set())
            s = Assign(var, src, frozenset(bangs))
        elif t.kind == "=":
            if banged:
                raise ParseError("! is only used with :=", t.line)
            self.next()
            s = DerefEq(var, self.parse_arg())
        else:
            raise ParseError(f"expected := or =, got {t.text!r}", t.line)
        s.point = self.next_point()
        return s

    def parse_rhs(self, var: str):
        t = self.peek()
        if t.kind == "INT":
            return Bind(var, None, (), int(self.next().text))
        if t.kind == "UNIT":
            self.next()
            return Bind(var, "()")
        if t.kind == "*":
            self.next()
            return EqDeref(var, self.expect("IDENT").text)
        if t.kind == "arrayref":
            self.next()
            arr = self.expect("IDENT").text
            return ArrayRef(var, arr, self.parse_arg())
        if t.kind != "IDENT":
            raise ParseError(f"unexpected {t.text!r}", t.line)
        head = self.next().text
        if head[0].isupper():
            args = []
            while self._arg_ahead():
                args.append(self.parse_arg())
            return Bind(var, head, tuple(args))
        if self.accept("dcolon"):
            return Instype(var, head, self.parse_type())
        args = []
        while self._arg_ahead():
            args.append(self.parse_arg())
        if not args and self.peek().kind != "!":
            return EqVar(var, head)
        bangs = self.parse_bangs()
        return App(var, head, tuple(args), bangs)

    def parse_case(self):
        self.expect("case")
        var = self.expect("IDENT").text
        self.expect("{", skip_nl=True)
        case = Case(var)
        while not self.accept("}", skip_nl=True):
            self.skip_nl()
            cons = self.peek()
            if cons.kind == "UNIT":
                self.next()
                cname = "()"
            else:
                cname = self.expect("IDENT").text
                if not cname[0].isupper():
                    raise ParseError(f"pattern must start with a constructor, "
                                     f"got {cname!r}", cons.line)
            refvars = []
            while self.accept("*"):
                refvars.append(self.expect("IDENT").text)
            self.expect("arrow")
            alt = Alt(Pat(cname, tuple(refvars)), [])
            alt.entry_point = self.next_point()
            alt.body = self.parse_block()
            case.alts.append(alt)
        case.end_point = self.next_point()
        return case


def parse_program(text: str) -> Program:
    """Parse a whole source file into a Program (syntax only)."""
    return Parser(text).parse_program()
