"""Shared helpers: corpus loading, random term generators, acceptance report."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from vpc.cli import parse_sig
from vpc.parser import parse_source
from vpc.syntax import (
    Add, And, Bottom, Call, Cond, Dialect, Eq, Exists, Forall, Implies, In, Lt, Name, Nil, Num,
    Or, Out, Par, RepIn, RepOut, Res, Top, Var, VarId,
)

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = Path(__file__).parent / "golden"

_SIG_LINE = re.compile(r"#\s*sig:\s*(.*)")


def load_corpus(kind: str) -> list:
    """(file stem, program, signature) for every corpus file of ``kind``."""
    out = []
    for path in sorted((CORPUS / kind).glob("*.vpc")):
        text = path.read_text(encoding="utf-8")
        m = _SIG_LINE.search(text)
        assert m, f"{path.name} has no '# sig:' header"
        out.append((path.stem, parse_source(text), parse_sig(m.group(1))))
    return out


# ------------------------------------------------------------ random terms


def rand_vterm(rng, nvars=3, depth=2, closed=False):
    r = rng.random()
    if depth == 0 or r < 0.4:
        return Num(rng.randrange(7))
    if r < 0.7 and not closed:
        return Var(VarId(rng.randrange(nvars)))
    return Add(rand_vterm(rng, nvars, depth - 1, closed), rand_vterm(rng, nvars, depth - 1, closed))


def rand_formula(rng, nvars=3, depth=2, closed=False):
    r = rng.random()
    if depth == 0 or r < 0.35:
        cmp_ = Lt if rng.random() < 0.5 else Eq
        return cmp_(rand_vterm(rng, nvars, 1, closed), rand_vterm(rng, nvars, 1, closed))
    if r < 0.45:
        return Top() if rng.random() < 0.5 else Bottom()
    if r < 0.8:
        op = rng.choice([And, Or, Implies])
        return op(rand_formula(rng, nvars, depth - 1, closed), rand_formula(rng, nvars, depth - 1, closed))
    q = Exists if rng.random() < 0.5 else Forall
    return q(VarId(rng.randrange(nvars)), rand_formula(rng, nvars, depth - 1, closed))


def rand_term(rng, dialect: Dialect, depth=5, names=4, nvars=3, ndefs=3):
    """Random core term; arbitrary (not necessarily closed or well typed)."""

    def name():
        return Name(rng.randrange(1, names + 1))

    def var():
        return VarId(rng.randrange(nvars))

    def go(d):
        if d == 0:
            return Nil()
        choices = ["nil", "in", "out", "par", "res", "cond"]
        choices += ["repin", "repout"] if dialect is Dialect.BANG else ["call"]
        k = rng.choice(choices)
        if k == "nil":
            return Nil()
        if k == "in":
            return In(name(), var(), go(d - 1))
        if k == "out":
            return Out(name(), rand_vterm(rng, nvars), go(d - 1))
        if k == "par":
            return Par(go(d - 1), go(d - 1))
        if k == "res":
            return Res(name(), go(d - 1))
        if k == "cond":
            return Cond(rand_formula(rng, nvars), go(d - 1))
        if k == "repin":
            return RepIn(name(), var(), go(d - 1))
        if k == "repout":
            return RepOut(name(), rand_vterm(rng, nvars), go(d - 1))
        n = rng.randrange(3)
        return Call(f"D{rng.randrange(1, ndefs + 1)}", tuple(rand_vterm(rng, nvars) for _ in range(n)))

    return go(depth)


def rand_closed_term(rng, dialect=Dialect.BANG, depth=4, names=3, replication=True):
    """Random closed VPC! (or definition-free VPC) process over names n1..n<names>."""

    def go(d, bound):
        if d == 0:
            return Nil()
        choices = ["nil", "in", "out", "par", "res", "cond"]
        if dialect is Dialect.BANG and replication:
            choices += ["repin", "repout"]
        k = rng.choice(choices)
        a = Name(rng.randrange(1, names + 1))
        vars_ = sorted(bound, key=lambda v: v.idx)
        if k == "nil":
            return Nil()
        if k in ("in", "repin"):
            x = VarId(rng.randrange(3))
            node = In if k == "in" else RepIn
            return node(a, x, go(d - 1, bound | {x}))
        if k in ("out", "repout"):
            t = Num(rng.randrange(3))
            if vars_ and rng.random() < 0.6:
                t = Var(rng.choice(vars_))
                if rng.random() < 0.3:
                    t = Add(t, Num(1))
            node = Out if k == "out" else RepOut
            return node(a, t, go(d - 1, bound))
        if k == "par":
            return Par(go(d - 1, bound), go(d - 1, bound))
        if k == "res":
            return Res(a, go(d - 1, bound))
        lhs = Var(rng.choice(vars_)) if vars_ else Num(rng.randrange(3))
        return Cond(rng.choice([Lt, Eq])(lhs, Num(rng.randrange(3))), go(d - 1, bound))

    return go(depth, frozenset())


# ------------------------------------------------------------ wrappers


@dataclass(frozen=True)
class Relabelled:
    """A state whose visible channels are renamed by ``mapping``."""

    inner: object
    mapping: tuple  # of (Name, Name)

    def transitions(self, vbound=1):
        m = dict(self.mapping)
        out = []
        for a, t in self.inner.transitions(vbound):
            chan = getattr(a, "chan", None)
            if chan is not None:
                a = type(a)(m.get(chan, chan), a.value)
            out.append((a, Relabelled(t, self.mapping)))
        return out


# ------------------------------------------------------- acceptance report

ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    line = f"ACCEPTANCE {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
