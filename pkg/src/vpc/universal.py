"""The code-level engine: run a process straight from its Gödel index.

A configuration is a tree of ``Sim`` leaves (each holding the code of a
sequential piece of the process) joined by ``ParC`` and ``ResC`` nodes.  Only
the outermost constructor of a leaf is ever decoded; a received value is
substituted into the code of the continuation before that continuation is
looked at.  Channel indices are resolved by the nearest enclosing ``ResC``
and otherwise by position in the signature's global list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .checker import check_program_code, normalize_program, parse_index
from .godel import (
    decode_args, decode_program, decode_term, decode_vterm, encode_term, encode_vterm,
    tag_split, unpair, unpair2, val_code,
)
from .lts import expand_moves, par_moves, res_moves
from .presburger import eval_term
from .syntax import (
    Dialect, Name, Num, TypeSig, VarId, def_free_names, format_term, free_names, hash_cached,
    rename_names, subst_many,
)


class UnknownDefinition(LookupError):
    """A call code names a definition outside the environment."""


# -------------------------------------------------------------- config tree


@dataclass(frozen=True)
class NilC:
    pass


@dataclass(frozen=True)
class Sim:
    code: int


@hash_cached
@dataclass(frozen=True)
class ParC:
    left: object
    right: object


@hash_cached
@dataclass(frozen=True)
class ResC:
    idx: int
    body: object


NILC = NilC()


@dataclass(frozen=True)
class Env:
    """Everything a leaf needs besides its code; hashable so it can key caches."""

    dialect: Dialect
    sig: TypeSig
    defs: tuple = ()  # of (param indices, body code)
    def_names: tuple = ()  # free name indices of each definition

    def resolve(self, idx: int) -> Name:
        if 1 <= idx <= self.sig.k:
            return self.sig.globals[idx - 1]
        return Name(idx)


@dataclass(frozen=True)
class Config:
    tree: object
    env: Env = field(compare=False)

    def __str__(self):
        return render(self.tree, self.env)

    def transitions(self, vbound: int = 1) -> list:
        return config_transitions(self, vbound)


# ------------------------------------------------------------------- leaves


@lru_cache(maxsize=1 << 16)
def expand(z: int, m: int):
    """Unfold the structural constructors (nil, parallel, restriction) of a code."""
    r, d = tag_split(z, m)
    if r == 0:
        return NILC
    if r == 3:
        a, b = unpair2(d)
        return ParC(expand(a, m), expand(b, m))
    if r == 4:
        c, b = unpair2(d)
        return ResC(c, expand(b, m))
    return Sim(z)


@lru_cache(maxsize=1 << 16)
def _subst_code(z: int, v: int, tcode: int, dialect: Dialect) -> int:
    term = decode_term(z, dialect)
    return encode_term(subst_many(term, {VarId(v): decode_vterm(tcode)}), dialect)


def _instantiate(params, body: int, arg_codes, dialect: Dialect) -> int:
    sub: dict = {}
    for x, t in zip(params, arg_codes):
        sub.setdefault(VarId(x), t)
    if not sub:
        return body
    return encode_term(subst_many(decode_term(body, dialect), sub), dialect)


@lru_cache(maxsize=1 << 16)
def leaf_moves(z: int, env: Env) -> tuple:
    dialect = env.dialect
    m = dialect.modulus
    r, d = tag_split(z, m)
    if r in (0, 3, 4):
        return tree_moves(expand(z, m), env)
    if r == 1 or (r == 6 and m == 7):
        a, x, body = unpair(d, 3)

        def receive(v, body=body, x=x, replicate=(r == 6)):
            nxt = expand(_subst_code(body, x, encode_vterm(Num(v)), dialect), m)
            return ParC(nxt, Sim(z)) if replicate else nxt

        return (("in", a, receive, True),)
    if r == 2 or r == 7:
        a, t, body = unpair(d, 3)
        nxt = expand(body, m)
        if r == 7:
            nxt = ParC(nxt, Sim(z))
        return (("out", a, val_code(t, "term"), nxt),)
    if r == 5:
        phi, body = unpair2(d)
        if not val_code(phi, "formula"):
            return ()
        return tree_moves(expand(body, m), env)
    # definition call
    j, l = unpair2(d)
    args = decode_args(l)
    if not 1 <= j <= len(env.defs):
        return ()
    params, body = env.defs[j - 1]
    if len(params) != len(args):
        return ()
    vals = tuple(Num(eval_term(a)) for a in args)
    return (("tau", expand(_instantiate(params, body, vals, dialect), m), True),)


def tree_moves(node, env: Env) -> tuple:
    match node:
        case NilC():
            return ()
        case Sim(z):
            return leaf_moves(z, env)
        case ParC(l, r):
            return tuple(par_moves(tree_moves(l, env), tree_moves(r, env), l, r, ParC))
        case ResC(c, b):
            return tuple(res_moves(tree_moves(b, env), c, lambda u: ResC(c, u)))
    raise TypeError(f"not a configuration node: {node!r}")


def resolved_moves(node, env: Env) -> list:
    """Moves of ``node`` with channel indices turned into global names."""
    out = []
    for mv in tree_moves(node, env):
        if mv[0] == "tau":
            out.append(mv)
        elif mv[0] == "out":
            out.append(("out", env.resolve(mv[1]), mv[2], mv[3]))
        else:
            out.append(("in", env.resolve(mv[1]), mv[2], mv[3]))
    return out


def config_transitions(c: Config, vbound: int = 1) -> list:
    """All (action, successor) pairs of ``c`` in deterministic order."""
    return [(a, Config(gc_tree(t, c.env), c.env))
            for a, t in expand_moves(resolved_moves(c.tree, c.env), vbound)]


@lru_cache(maxsize=1 << 16)
def leaf_free(z: int, env: Env) -> frozenset:
    fn = {f"D{j}": frozenset(Name(i) for i in names) for j, names in enumerate(env.def_names, 1)}
    return frozenset(a.idx for a in free_names(decode_term(z, env.dialect), fn))


@lru_cache(maxsize=1 << 16)
def tree_free(node, env: Env) -> frozenset:
    match node:
        case NilC():
            return frozenset()
        case Sim(z):
            return leaf_free(z, env)
        case ParC(l, r):
            return tree_free(l, env) | tree_free(r, env)
        case ResC(c, b):
            return tree_free(b, env) - {c}
    raise TypeError(f"not a configuration node: {node!r}")


def gc_tree(node, env: Env):
    """Drop nil components, unused restrictions and leaves guarded by a false formula."""
    match node:
        case ParC(l, r):
            l2, r2 = gc_tree(l, env), gc_tree(r, env)
            if isinstance(l2, NilC):
                return r2
            if isinstance(r2, NilC):
                return l2
            return node if (l2 is l and r2 is r) else ParC(l2, r2)
        case ResC(c, b):
            b2 = gc_tree(b, env)
            if isinstance(b2, NilC) or c not in tree_free(b2, env):
                return b2
            return node if b2 is b else ResC(c, b2)
        case Sim(z):
            r, d = tag_split(z, env.dialect.modulus)
            if r == 5 and not val_code(unpair2(d)[0], "formula"):
                return NILC
    return node


# --------------------------------------------------------------------- boot


def nil_config(sig: TypeSig, dialect: Dialect = Dialect.VPC) -> Config:
    return Config(Sim(0), Env(dialect, sig))


def boot_interpreter(z: int, sig: TypeSig) -> Config:
    """Interpreter for VPC! indices: ill-typed codes behave as 0."""
    return Config(Sim(parse_index(z, sig, Dialect.BANG)), Env(Dialect.BANG, sig))


def program_env(p, sig: TypeSig) -> Env:
    """Engine environment for a program whose definitions are named ``D1..Dk``."""
    positions = {d.name: j for j, d in enumerate(p.defs, 1)}
    defs = tuple((tuple(x.idx for x in d.params), encode_term(d.body, Dialect.VPC, positions))
                 for d in p.defs)
    fn = def_free_names(p.defs)
    names = tuple(tuple(sorted(a.idx for a in fn[d.name])) for d in p.defs)
    return Env(Dialect.VPC, sig, defs, names)


def boot_universal(z: int, sig: TypeSig) -> Config:
    """Universal process for program codes of type ``sig``."""
    if check_program_code(z, sig) is not None:
        return nil_config(sig)
    p = normalize_program(decode_program(z), sig)
    return Config(Sim(encode_term(p.main, Dialect.VPC)), program_env(p, sig))


# ---------------------------------------------------------------- rendering


def render(node, env: Env) -> str:
    """Readable form of a configuration, with globals shown by their real names."""
    mapping = {Name(m): a for m, a in enumerate(env.sig.globals, 1)}

    def go(n, bound):
        match n:
            case NilC():
                return "0"
            case Sim(z):
                t = decode_term(z, env.dialect)
                return "{" + format_term(rename_names(t, {k: v for k, v in mapping.items()
                                                          if k not in bound})) + "}"
            case ParC(l, r):
                return f"({go(l, bound)} | {go(r, bound)})"
            case ResC(c, b):
                return f"(n{c}){go(b, bound | {Name(c)})}"
        return repr(n)

    return go(node, frozenset())
