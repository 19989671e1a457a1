"""Pairing functions and the bijective Gödel codecs.

Every natural number decodes to exactly one term of each dialect, and every
term encodes to exactly one number.  Codes are plain Python ints.

Layout of the process-term codes (``m`` is the dialect modulus, 7 or 6)::

    0                     nil
    m*<a, x, T> + 1       a(x).T
    m*<a, t, T> + 2       'a(t).T
    m*<S, T> + 3          S | T
    m*<c, T> + 4          (c)T
    m*<phi, T> + 5        if phi then T
    7*<a, x, T> + 6       !a(x).T          (VPC! only)
    7*<a, t, T> + 7       !'a(t).T         (VPC! only)
    6*<j, l> + 6          D_j(t1..tn)      (VPC only; l = 0 or 1 + <n-1, <t1..tn>>)
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

from .syntax import (
    Add, And, Bottom, Call, Cond, Dialect, Eq, Exists, Forall, Implies, In, Lt, Name, Nil,
    Not, Num, Or, Out, ParamDef, Par, Program, RepIn, RepOut, Res, Top, Var, VarId,
    desugar_term, negate, subst_value,
)


class CodecError(ValueError):
    pass


# ------------------------------------------------------------------ pairing


def pair2(x: int, y: int) -> int:
    s = x + y
    return s * (s + 1) // 2 + y


def unpair2(z: int) -> tuple:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def pair(xs) -> int:
    """k-ary pairing: <> = 0, <a> = a, <a, rest...> = pi(a, <rest...>)."""
    xs = list(xs)
    if not xs:
        return 0
    z = xs[-1]
    for x in reversed(xs[:-1]):
        z = pair2(x, z)
    return z


def unpair(z: int, k: int) -> tuple:
    if k == 0:
        return ()
    out = []
    for _ in range(k - 1):
        x, z = unpair2(z)
        out.append(x)
    out.append(z)
    return tuple(out)


def tag_split(z: int, m: int) -> tuple:
    """(0, 0) for z = 0, else the (r, d) with 1 <= r <= m and z = m*d + r."""
    if z == 0:
        return 0, 0
    d, r = divmod(z - 1, m)
    return r + 1, d


# -------------------------------------------------------------- value terms


def encode_vterm(t) -> int:
    match t:
        case Num(k):
            return 3 * k
        case Var(v):
            return 3 * v.idx + 1
        case Add(l, r):
            return 3 * pair2(encode_vterm(l), encode_vterm(r)) + 2
    raise CodecError(f"not a value term: {t!r}")


@lru_cache(maxsize=1 << 16)
def decode_vterm(z: int):
    q, r = divmod(z, 3)
    if r == 0:
        return Num(q)
    if r == 1:
        return Var(VarId(q))
    left, right = unpair2(q)
    return Add(decode_vterm(left), decode_vterm(right))


# ----------------------------------------------------------------- formulas

_BINARY = (And, Or, Implies)


def encode_formula(phi) -> int:
    match phi:
        case Bottom():
            return 0
        case Top():
            return 1
        case Not(b):
            return encode_formula(negate(b))
        case And(l, r):
            return 7 * pair2(encode_formula(l), encode_formula(r)) + 2
        case Or(l, r):
            return 7 * pair2(encode_formula(l), encode_formula(r)) + 3
        case Implies(l, r):
            return 7 * pair2(encode_formula(l), encode_formula(r)) + 4
        case Exists(v, b):
            return 7 * pair2(v.idx, encode_formula(b)) + 5
        case Forall(v, b):
            return 7 * pair2(v.idx, encode_formula(b)) + 6
        case Lt(s, t):
            return 7 * pair2(encode_vterm(s), encode_vterm(t)) + 7
        case Eq(s, t):
            return 7 * pair2(encode_vterm(s), encode_vterm(t)) + 8
    raise CodecError(f"not a formula: {phi!r}")


@lru_cache(maxsize=1 << 16)
def decode_formula(z: int):
    if z == 0:
        return Bottom()
    if z == 1:
        return Top()
    q, r = divmod(z - 2, 7)
    a, b = unpair2(q)
    if r < 3:
        return _BINARY[r](decode_formula(a), decode_formula(b))
    if r == 3:
        return Exists(VarId(a), decode_formula(b))
    if r == 4:
        return Forall(VarId(a), decode_formula(b))
    if r == 5:
        return Lt(decode_vterm(a), decode_vterm(b))
    return Eq(decode_vterm(a), decode_vterm(b))


# ------------------------------------------------------------ process terms

_DEF_NAME = re.compile(r"D(\d+)$")


def _default_position(name: str) -> int:
    m = _DEF_NAME.match(name)
    if m is None:
        raise CodecError(f"no position known for definition {name!r}")
    return int(m.group(1))


def encode_args(args) -> int:
    """The ``l`` component of a call code."""
    if not args:
        return 0
    return 1 + pair2(len(args) - 1, pair(encode_vterm(a) for a in args))


def decode_args(l: int) -> tuple:
    if l == 0:
        return ()
    n1, rest = unpair2(l - 1)
    return tuple(decode_vterm(c) for c in unpair(rest, n1 + 1))


def encode_term(t, dialect: Dialect = Dialect.BANG, positions=None) -> int:
    """Gödel index of the process term ``t``.

    ``positions`` maps definition names to their 1-based position; by default
    a call to ``D<j>`` is taken to refer to position ``j``.
    """
    m = dialect.modulus

    def lookup(name):
        if positions is not None and name in positions:
            return positions[name]
        return _default_position(name)

    def go(p):
        match p:
            case Nil():
                return 0
            case In(a, x, b):
                return m * pair((a.idx, x.idx, go(b))) + 1
            case Out(a, s, b):
                return m * pair((a.idx, encode_vterm(s), go(b))) + 2
            case Par(l, r):
                return m * pair2(go(l), go(r)) + 3
            case Res(c, b):
                return m * pair2(c.idx, go(b)) + 4
            case Cond(phi, b):
                return m * pair2(encode_formula(phi), go(b)) + 5
            case RepIn(a, x, b):
                if dialect is not Dialect.BANG:
                    raise CodecError("replication in a VPC term")
                return 7 * pair((a.idx, x.idx, go(b))) + 6
            case RepOut(a, s, b):
                if dialect is not Dialect.BANG:
                    raise CodecError("replication in a VPC term")
                return 7 * pair((a.idx, encode_vterm(s), go(b))) + 7
            case Call(name, args):
                if dialect is not Dialect.VPC:
                    raise CodecError("definition call in a VPC! term")
                j = lookup(name)
                return 6 * pair2(j, encode_args(args)) + 6
        raise CodecError(f"cannot encode {type(p).__name__}")

    return go(desugar_term(t))


@lru_cache(maxsize=1 << 16)
def _decode(z: int, m: int):
    r, d = tag_split(z, m)
    if r == 0:
        return Nil()
    if r in (1, 2, 6, 7) and not (r == 6 and m == 6):
        a, mid, body = unpair(d, 3)
        cont = _decode(body, m)
        if r in (1, 6):
            node = In if r == 1 else RepIn
            return node(Name(a), VarId(mid), cont)
        node = Out if r == 2 else RepOut
        return node(Name(a), decode_vterm(mid), cont)
    if r == 6:
        j, l = unpair2(d)
        return Call(f"D{j}", decode_args(l))
    a, b = unpair2(d)
    if r == 3:
        return Par(_decode(a, m), _decode(b, m))
    if r == 4:
        return Res(Name(a), _decode(b, m))
    return Cond(decode_formula(a), _decode(b, m))


def decode_term(z: int, dialect: Dialect = Dialect.BANG):
    if z < 0:
        raise CodecError("codes are natural numbers")
    return _decode(z, dialect.modulus)


# ----------------------------------------------------------------- programs


def encode_def(d: ParamDef, positions=None) -> int:
    body = encode_term(d.body, Dialect.VPC, positions)
    return pair2(d.arity, pair([x.idx for x in d.params] + [body]))


def decode_def(z: int, j: int) -> ParamDef:
    arity, rest = unpair2(z)
    *params, body = unpair(rest, arity + 1)
    return ParamDef(f"D{j}", tuple(VarId(x) for x in params), decode_term(body, Dialect.VPC))


def encode_system(defs, positions=None) -> int:
    if positions is None:
        positions = {d.name: j for j, d in enumerate(defs, 1)}
    return pair(encode_def(d, positions) for d in defs)


def decode_system(z: int, k: int) -> tuple:
    return tuple(decode_def(c, j) for j, c in enumerate(unpair(z, k), 1))


def encode_program(p: Program) -> int:
    """<k, <defs, main>> with ``defs`` the k-ary pairing of definition tuples."""
    if p.dialect is not Dialect.VPC:
        raise CodecError("only VPC programs have program codes")
    positions = {d.name: j for j, d in enumerate(p.defs, 1)}
    main = encode_term(p.main, Dialect.VPC, positions)
    return pair2(len(p.defs), pair2(encode_system(p.defs, positions), main))


def decode_program(z: int) -> Program:
    k, rest = unpair2(z)
    defs_code, main = unpair2(rest)
    if k == 0 and defs_code != 0:
        raise CodecError("program code declares no definitions but carries some")
    return Program(Dialect.VPC, decode_system(defs_code, k), decode_term(main, Dialect.VPC))


# --------------------------------------------------- code-level operations


def subst_code(z: int, v: int, t: int, dialect: Dialect = Dialect.BANG) -> int:
    """Code of ``decode(z){decode_vterm(t)/x_v}``."""
    if z == 0:
        return 0
    term = decode_term(z, dialect)
    return encode_term(subst_value(term, VarId(v), decode_vterm(t)), dialect)


def val_code(z: int, kind: str = "term"):
    from .presburger import decide, eval_term

    if kind == "term":
        return eval_term(decode_vterm(z))
    if kind == "formula":
        return decide(decode_formula(z))
    raise ValueError(f"unknown kind {kind!r}")
