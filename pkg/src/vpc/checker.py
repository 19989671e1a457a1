"""Type checking and normalization of Gödel indices against a ``TypeSig``.

A code is well typed for ``[i, globals]`` when the decoded process is closed,
uses no global name outside ``globals`` and binds at most ``i`` distinct
local names.  Normalization renames every name occurrence uniformly: the
m-th global becomes ``n<m>`` and names that are only ever bound become
``n<k+1>, n<k+2>, ...`` in the order their first binder is met.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .godel import CodecError, decode_program, decode_term, encode_program, encode_term
from .syntax import (
    Call, Cond, Dialect, In, Name, Nil, Out, ParamDef, Par, Program, RepIn, RepOut, Res,
    TypeSig, formula_vars, rename_names, vterm_vars,
)


class ViolationKind(enum.Enum):
    FreeVariable = "free variable"
    OpenFormula = "open formula"
    GlobalBudget = "global name outside the signature"
    LocalBudget = "too many local names"
    DialectMismatch = "construct not in this dialect"
    Malformed = "malformed program code"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    location: tuple = ()
    detail: str = ""

    def __str__(self):
        where = "/".join(str(s) for s in self.location) or "<root>"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.kind.name} at {where}{extra}"


class _Walk:
    """Single left-to-right pass collecting the first violation."""

    def __init__(self, sig: TypeSig, dialect: Dialect):
        self.allowed = set(sig.globals)
        self.dialect = dialect
        self.locals: dict = {}

    def run(self, t, bound_vars, path=()):
        return self._go(t, frozenset(bound_vars), frozenset(), path)

    def _chan(self, a, bound_names, path):
        if a not in bound_names and a not in self.allowed:
            return Violation(ViolationKind.GlobalBudget, path, str(a))
        return None

    def _go(self, t, vs, ns, path):
        match t:
            case Nil():
                return None
            case In(a, x, b) | RepIn(a, x, b):
                if isinstance(t, RepIn) and self.dialect is not Dialect.BANG:
                    return Violation(ViolationKind.DialectMismatch, path, "replication")
                return self._chan(a, ns, path) or self._go(b, vs | {x}, ns, path + ("body",))
            case Out(a, s, b) | RepOut(a, s, b):
                if isinstance(t, RepOut) and self.dialect is not Dialect.BANG:
                    return Violation(ViolationKind.DialectMismatch, path, "replication")
                if vterm_vars(s) - vs:
                    free = sorted(vterm_vars(s) - vs)
                    return Violation(ViolationKind.FreeVariable, path, str(free[0]))
                return self._chan(a, ns, path) or self._go(b, vs, ns, path + ("body",))
            case Par(l, r):
                return self._go(l, vs, ns, path + ("left",)) or self._go(r, vs, ns, path + ("right",))
            case Res(c, b):
                self.locals.setdefault(c, None)
                return self._go(b, vs, ns | {c}, path + ("body",))
            case Cond(phi, b):
                if formula_vars(phi) - vs:
                    free = sorted(formula_vars(phi) - vs)
                    return Violation(ViolationKind.OpenFormula, path, str(free[0]))
                return self._go(b, vs, ns, path + ("body",))
            case Call(_, args):
                if self.dialect is not Dialect.VPC:
                    return Violation(ViolationKind.DialectMismatch, path, "definition call")
                for k, s in enumerate(args):
                    if vterm_vars(s) - vs:
                        free = sorted(vterm_vars(s) - vs)
                        return Violation(ViolationKind.FreeVariable, path + (f"arg{k}",), str(free[0]))
                return None
        return Violation(ViolationKind.DialectMismatch, path, type(t).__name__)


def check_term(t, sig: TypeSig, dialect: Dialect = Dialect.BANG, bound_vars=()) -> Optional[Violation]:
    w = _Walk(sig, dialect)
    v = w.run(t, bound_vars)
    if v is None and len(w.locals) > sig.local_budget:
        v = Violation(ViolationKind.LocalBudget, (), f"{len(w.locals)} > {sig.local_budget}")
    return v


def grammar_check(z: int, sig: TypeSig, dialect: Dialect = Dialect.BANG) -> Optional[Violation]:
    """``None`` when ``decode(z)`` is a process of type ``sig``, else the first violation."""
    return check_term(decode_term(z, dialect), sig, dialect)


def check_program(p: Program, sig: TypeSig) -> Optional[Violation]:
    """Whole-program variant: bodies may use their parameters; locals are counted jointly."""
    w = _Walk(sig, Dialect.VPC)
    v = w.run(p.main, (), ("main",))
    for d in p.defs:
        if v is not None:
            break
        v = w.run(d.body, d.params, (d.name,))
    if v is None and len(w.locals) > sig.local_budget:
        v = Violation(ViolationKind.LocalBudget, (), f"{len(w.locals)} > {sig.local_budget}")
    return v


def check_program_code(z: int, sig: TypeSig) -> Optional[Violation]:
    try:
        p = decode_program(z)
    except CodecError as e:
        return Violation(ViolationKind.Malformed, (), str(e))
    return check_program(p, sig)


# ---------------------------------------------------------------- normalize


def _binder_order(t, out: dict):
    match t:
        case Res(c, b):
            out.setdefault(c, None)
            _binder_order(b, out)
        case In(_, _, b) | Out(_, _, b) | RepIn(_, _, b) | RepOut(_, _, b) | Cond(_, b):
            _binder_order(b, out)
        case Par(l, r):
            _binder_order(l, out)
            _binder_order(r, out)


def name_map(terms, sig: TypeSig) -> dict:
    """The uniform renaming used for normal indices."""
    mapping = {a: Name(m) for m, a in enumerate(sig.globals, 1)}
    binders: dict = {}
    for t in terms:
        _binder_order(t, binders)
    nxt = sig.k + 1
    for c in binders:
        if c not in mapping:
            mapping[c] = Name(nxt)
            nxt += 1
    return mapping


def normalize_term(t, sig: TypeSig):
    return rename_names(t, name_map([t], sig))


def normalize(z: int, sig: TypeSig, dialect: Dialect = Dialect.BANG) -> int:
    """Normal index of ``z``; requires ``grammar_check(z, sig, dialect)`` to pass."""
    v = grammar_check(z, sig, dialect)
    if v is not None:
        raise ValueError(f"index {z} is not of type [{sig}]: {v}")
    return encode_term(normalize_term(decode_term(z, dialect), sig), dialect)


def parse_index(z: int, sig: TypeSig, dialect: Dialect = Dialect.BANG) -> int:
    """Total: the normal index of ``z``, or 0 when ``z`` is ill typed."""
    if grammar_check(z, sig, dialect) is not None:
        return 0
    return encode_term(normalize_term(decode_term(z, dialect), sig), dialect)


def normalize_program(p: Program, sig: TypeSig) -> Program:
    """Rename names in main and all bodies with one consistent map."""
    v = check_program(p, sig)
    if v is not None:
        raise ValueError(f"program is not of type [{sig}]: {v}")
    mapping = name_map([p.main] + [d.body for d in p.defs], sig)
    defs = tuple(ParamDef(d.name, d.params, rename_names(d.body, mapping)) for d in p.defs)
    return Program(p.dialect, defs, rename_names(p.main, mapping), p.symtab)


def parse_program_index(z: int, sig: TypeSig) -> int:
    """Program-code analogue of :func:`parse_index` (0 is the empty program)."""
    if check_program_code(z, sig) is not None:
        return 0
    return encode_program(normalize_program(decode_program(z), sig))


def canonical_sig(sig: TypeSig) -> TypeSig:
    return TypeSig(sig.local_budget, tuple(Name(m) for m in range(1, sig.k + 1)))
