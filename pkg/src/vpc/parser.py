"""Recursive-descent parser for the concrete VPC / VPC! syntax.

Identifiers of the form ``n<k>`` in channel position and ``x<k>`` in variable
position denote the name or variable with index ``k``.  Any other identifier
is interned on first occurrence into the smallest index not otherwise used
(names from 1, variables from 0); the mapping is kept in ``Program.symtab``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    AbsApp, Abstraction, AbsType, AbsVarApp, Add, And, Bottom, Call, Case, Cond, Dialect,
    Eq, Exists, Forall, HoIn, HoOut, IfElse, Implies, In, Let, Lt, Name, Nil, Not, Num,
    Or, Out, ParamDef, Par, Program, RepIn, RepOut, Res, Top, Var, VarId, calls_in,
    free_vars,
)


class ParseError(ValueError):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NAT, IDENT, KW, SYM, EOF
    text: str
    line: int
    col: int


KEYWORDS = {
    "def", "main", "if", "then", "else", "case", "of", "end", "let", "in", "new",
    "exists", "forall", "tt", "ff", "as", "lambda",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nat>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>=>|/\\|\\/|[()'!.|,=+<>;~:])
""", re.VERBOSE)

_CANON_NAME = re.compile(r"n(\d+)$")
_CANON_VAR = re.compile(r"x(\d+)$")


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nat":
            out.append(Token("NAT", chunk, line, col))
        elif kind == "ident":
            out.append(Token("KW" if chunk in KEYWORDS else "IDENT", chunk, line, col))
        elif kind == "sym":
            out.append(Token("SYM", chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(Token("EOF", "", line, pos - line_start + 1))
    return out


class _Interner:
    def __init__(self, tokens):
        self.names: dict = {}
        self.vars: dict = {}
        self.used_names = set()
        self.used_vars = set()
        for t in tokens:
            if t.kind == "IDENT":
                if m := _CANON_NAME.match(t.text):
                    self.used_names.add(int(m.group(1)))
                if m := _CANON_VAR.match(t.text):
                    self.used_vars.add(int(m.group(1)))
        self._anon = 0

    def snapshot(self):
        return (dict(self.names), dict(self.vars), set(self.used_names),
                set(self.used_vars), self._anon)

    def restore(self, snap):
        self.names, self.vars, self.used_names, self.used_vars, self._anon = (
            snap[0], snap[1], snap[2], snap[3], snap[4])

    def name(self, ident: str) -> Name:
        if m := _CANON_NAME.match(ident):
            return Name(int(m.group(1)))
        if ident not in self.names:
            k = 1
            while k in self.used_names:
                k += 1
            self.used_names.add(k)
            self.names[ident] = Name(k)
        return self.names[ident]

    def var(self, ident: str) -> VarId:
        if m := _CANON_VAR.match(ident):
            return VarId(int(m.group(1)))
        if ident not in self.vars:
            k = 0
            while k in self.used_vars:
                k += 1
            self.used_vars.add(k)
            self.vars[ident] = VarId(k)
        return self.vars[ident]

    def anonymous_var(self) -> VarId:
        self._anon += 1
        return self.var(f"_anon{self._anon}")


class _Parser:
    def __init__(self, text: str, higher_order: bool = False, closed: bool = True):
        self.toks = tokenize(text)
        self.closed = closed
        self.i = 0
        self.ho = higher_order
        self.intern = _Interner(self.toks)
        self.def_names = {
            self.toks[j + 1].text
            for j, t in enumerate(self.toks[:-1])
            if t.kind == "KW" and t.text == "def" and self.toks[j + 1].kind == "IDENT"
        }
        self.ho_scope: list = []
        self.uses_bang = False

    # ---------------------------------------------------------------- helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text, k=0) -> bool:
        t = self.peek(k)
        return t.kind in ("SYM", "KW") and t.text == text

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "IDENT":
            self.fail(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t.text

    def nat(self) -> int:
        if self.tok.kind != "NAT":
            self.fail(f"expected number, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return int(t.text)

    # ---------------------------------------------------------------- program

    def program(self) -> Program:
        defs = []
        seen = {}
        while self.at("def"):
            self.i += 1
            tok = self.tok
            name = self.ident()
            if name in seen:
                self.fail(f"duplicate definition {name!r}", tok)
            self.expect("(")
            params = []
            if not self.at(")"):
                params.append(self.intern.var(self.ident()))
                while self.at(","):
                    self.i += 1
                    params.append(self.intern.var(self.ident()))
            self.expect(")")
            self.expect("=")
            body = self.term()
            seen[name] = (tok, len(params))
            defs.append((tok, ParamDef(name, tuple(params), body)))
        self.expect("main")
        self.expect("=")
        main = self.term()
        if self.tok.kind != "EOF":
            self.fail(f"unexpected {self.tok.text!r}")
        if self.uses_bang and defs:
            raise ParseError("replication cannot be mixed with definitions", defs[0][0].line,
                             defs[0][0].col)

        arities = {d.name: d.arity for _, d in defs}
        for where, body in [(tok, d.body) for tok, d in defs] + [(None, main)]:
            for c in calls_in(body):
                if c.name not in arities:
                    raise ParseError(f"unknown definition {c.name!r}")
                if len(c.args) != arities[c.name]:
                    raise ParseError(f"{c.name} expects {arities[c.name]} argument(s), "
                                     f"got {len(c.args)}")
        for tok, d in defs:
            extra = free_vars(d.body) - set(d.params)
            if extra:
                names = ", ".join(str(v) for v in sorted(extra))
                raise ParseError(f"free variable(s) {names} in body of {d.name}", tok.line, tok.col)
        if self.closed and free_vars(main):
            names = ", ".join(str(v) for v in sorted(free_vars(main)))
            raise ParseError(f"free variable(s) {names} in main")

        dialect = Dialect.BANG if self.uses_bang else Dialect.VPC
        symtab = {"names": dict(self.intern.names), "vars": dict(self.intern.vars)}
        return Program(dialect, tuple(d for _, d in defs), main, symtab)

    # ---------------------------------------------------------------- terms

    def term(self):
        left = self.prefix()
        while self.at("|"):
            self.i += 1
            left = Par(left, self.prefix())
        return left

    def prefix(self):
        t = self.tok
        if t.kind == "NAT":
            if t.text != "0":
                self.fail("only 0 is a process constant")
            self.i += 1
            return Nil()
        if self.at("("):
            if self.peek(1).kind == "IDENT" and self.at(")", 2):
                self.i += 1
                c = self.intern.name(self.ident())
                self.expect(")")
                return Res(c, self.prefix())
            if self.ho and self.at("lambda", 1):
                self.i += 1
                A = self.abstraction()
                self.expect(")")
                return AbsApp(A, self.name_list())
            self.i += 1
            inner = self.term()
            self.expect(")")
            return inner
        if self.at("new"):
            self.i += 1
            c = self.intern.name(self.ident())
            self.expect(".")
            return Res(c, self.prefix())
        if self.at("'"):
            self.i += 1
            return self.output(replicated=False)
        if self.at("!"):
            self.i += 1
            self.uses_bang = True
            if self.at("'"):
                self.i += 1
                return self.output(replicated=True)
            return self.input(replicated=True)
        if self.at("if"):
            self.i += 1
            phi = self.formula()
            self.expect("then")
            then = self.prefix()
            if self.at("else"):
                self.i += 1
                return IfElse(phi, then, self.prefix())
            return Cond(phi, then)
        if self.at("case"):
            return self.case()
        if self.at("let"):
            self.i += 1
            x = self.intern.var(self.ident())
            self.expect("=")
            s = self.vterm()
            self.expect("in")
            return Let(x, s, self.prefix())
        if t.kind == "IDENT":
            if self.at(".", 1):
                return self.input(replicated=False)
            if self.at("(", 1):
                if self.peek(2).kind == "IDENT" and (
                        (self.at(")", 3) and self.at(".", 4)) or (self.ho and self.at(":", 3))):
                    return self.input(replicated=False)
                if t.text in self.ho_scope:
                    self.i += 1
                    return AbsVarApp(t.text, self.name_list())
                return self.call()
        self.fail(f"expected a process term, found {t.text or 'end of input'!r}")

    def name_list(self):
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.intern.name(self.ident()))
            while self.at(","):
                self.i += 1
                out.append(self.intern.name(self.ident()))
        self.expect(")")
        return tuple(out)

    def input(self, replicated):
        a = self.intern.name(self.ident())
        if self.at("."):
            self.i += 1
            x = self.intern.anonymous_var()
            body = self.prefix()
        else:
            self.expect("(")
            ident = self.ident()
            if self.at(":"):
                if replicated or not self.ho:
                    self.fail("higher-order input is not allowed here")
                self.i += 1
                ty = self.abs_type()
                self.expect(")")
                self.expect(".")
                self.ho_scope.append(ident)
                try:
                    body = self.prefix()
                finally:
                    self.ho_scope.pop()
                return HoIn(a, ident, ty, body)
            x = self.intern.var(ident)
            self.expect(")")
            self.expect(".")
            body = self.prefix()
        return RepIn(a, x, body) if replicated else In(a, x, body)

    def output(self, replicated):
        a = self.intern.name(self.ident())
        if self.at("."):
            self.i += 1
            s = Num(0)
        else:
            self.expect("(")
            if self.ho and self.at("lambda"):
                if replicated:
                    self.fail("higher-order output cannot be replicated")
                A = self.abstraction()
                self.expect(")")
                self.expect(".")
                return HoOut(a, A, A.ty, self.prefix())
            s = self.vterm()
            self.expect(")")
            if not self.at("."):
                # a bare output 'a(t) stands for 'a(t).0
                return RepOut(a, s, Nil()) if replicated else Out(a, s, Nil())
            self.i += 1
        body = self.prefix()
        return RepOut(a, s, body) if replicated else Out(a, s, body)

    def call(self):
        tok = self.tok
        name = self.ident()
        if name not in self.def_names:
            self.fail(f"unknown definition {name!r}", tok)
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.vterm())
            while self.at(","):
                self.i += 1
                args.append(self.vterm())
        self.expect(")")
        return Call(name, tuple(args))

    def case(self):
        self.expect("case")
        s = self.vterm()
        x = None
        if self.at("as"):
            self.i += 1
            x = self.intern.var(self.ident())
        self.expect("of")
        arms = []
        while not self.at("end"):
            phi = self.disjunction()
            self.expect("=>")
            body = self.prefix()
            self.expect(";")
            arms.append((phi, body))
        self.expect("end")
        return Case(s, x, tuple(arms))

    def abs_type(self):
        self.expect("<")
        i = self.nat()
        self.expect(",")
        j = self.nat()
        self.expect(">")
        return AbsType(i, j)

    def abstraction(self):
        tok = self.expect("lambda")
        params = []
        while self.tok.kind == "IDENT":
            params.append(self.intern.name(self.ident()))
        self.expect(".")
        body = self.term()
        self.expect(":")
        ty = self.abs_type()
        if ty.param_count != len(params):
            self.fail(f"abstraction has {len(params)} parameter(s) but type {ty}", tok)
        return Abstraction(tuple(params), body, ty)

    # ---------------------------------------------------------------- formulas

    def formula(self):
        left = self.disjunction()
        if self.at("=>"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("\\/"):
            self.i += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.at("/\\"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.at("~"):
            self.i += 1
            return Not(self.unary())
        if self.at("tt"):
            self.i += 1
            return Top()
        if self.at("ff"):
            self.i += 1
            return Bottom()
        if self.at("exists") or self.at("forall"):
            quant = Exists if self.tok.text == "exists" else Forall
            self.i += 1
            v = self.intern.var(self.ident())
            self.expect(".")
            return quant(v, self.formula())
        if self.at("("):
            mark, snap = self.i, self.intern.snapshot()
            try:
                return self.comparison()
            except ParseError:
                self.i = mark
                self.intern.restore(snap)
            self.i += 1
            inner = self.formula()
            self.expect(")")
            return inner
        return self.comparison()

    def comparison(self):
        s = self.vterm()
        if self.at("<"):
            self.i += 1
            return Lt(s, self.vterm())
        if self.at("="):
            self.i += 1
            return Eq(s, self.vterm())
        self.fail("expected '<' or '=' in formula")

    # ---------------------------------------------------------------- value terms

    def vterm(self):
        left = self.vatom()
        while self.at("+"):
            self.i += 1
            left = Add(left, self.vatom())
        return left

    def vatom(self):
        t = self.tok
        if t.kind == "NAT":
            self.i += 1
            return Num(int(t.text))
        if t.kind == "IDENT":
            if t.text == "s" and self.at("(", 1):
                self.i += 2
                inner = self.vterm()
                self.expect(")")
                return Add(inner, Num(1))
            self.i += 1
            return Var(self.intern.var(t.text))
        if self.at("("):
            self.i += 1
            inner = self.vterm()
            self.expect(")")
            return inner
        self.fail(f"expected a value term, found {t.text or 'end of input'!r}")


def parse_source(text: str, higher_order: bool = False, closed: bool = True) -> Program:
    """Parse a whole program (``def ...`` lines followed by ``main = ...``).

    With ``closed=False`` free variables in ``main`` are allowed.
    """
    return _Parser(text, higher_order, closed).program()


def parse_term(text: str, higher_order: bool = False, closed: bool = True):
    """Parse a single process term; a convenience wrapper."""
    return parse_source("main = " + text, higher_order, closed).main


def parse_formula(text: str):
    p = _Parser(text)
    phi = p.formula()
    if p.tok.kind != "EOF":
        p.fail(f"unexpected {p.tok.text!r}")
    return phi


def parse_vterm(text: str):
    p = _Parser(text)
    t = p.vterm()
    if p.tok.kind != "EOF":
        p.fail(f"unexpected {p.tok.text!r}")
    return t

