"""Higher-order VPC: its transition rules and the translation to first order.

Abstractions travel as Gödel codes.  A received abstraction variable ``X``
becomes an ordinary value variable ``x``, and an application ``X(a1..aj)``
becomes

    (d)( 'd(retarget(x; a1..aj)) | U_d[i; a1..aj] )

where the second component is a universal-process seed: once it receives a
code on ``d`` it continues as the engine booted on that code.  The seed and
the retargeting output are wrapper terms understood by the direct LTS
through its extension hooks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .checker import normalize_program
from .godel import CodecError, decode_program, encode_program
from .lts import Input, Output, Tau, _lift, par_moves, res_moves
from .presburger import decide, eval_term
from .syntax import (
    AbsApp, Abstraction, AbsType, AbsVarApp, Call, Cond, Dialect, HoIn, HoOut, In, Name, Nil,
    NIL, Num, Out, Par, Program, RepIn, RepOut, Res, TypeSig, Var, VarId, all_vars,
    def_free_names, desugar_term, format_abstraction, format_term, format_vterm, free_names,
    rename_names, subst_value, subst_vterm, vterm_vars,
)
from .universal import Config, NilC, boot_universal, gc_tree, render, resolved_moves, tree_free


# ---------------------------------------------------------------- actions


@dataclass(frozen=True)
class HoInput:
    chan: Name
    abstraction: Abstraction

    def __str__(self):
        return f"in {self.chan} ({format_abstraction(self.abstraction)})"


@dataclass(frozen=True)
class HoOutput:
    chan: Name
    abstraction: Abstraction

    def __str__(self):
        return f"out {self.chan} ({format_abstraction(self.abstraction)})"


# ------------------------------------------------------- static operations


def _max_name(t) -> int:
    """Largest name index occurring anywhere in a (possibly higher-order) term."""
    best = 0

    def see(a):
        nonlocal best
        best = max(best, a.idx)

    def go(p):
        match p:
            case In(a, _, b) | Out(a, _, b) | RepIn(a, _, b) | RepOut(a, _, b) | HoIn(a, _, _, b):
                see(a)
                go(b)
            case HoOut(a, A, _, b):
                see(a)
                go_abs(A)
                go(b)
            case Res(c, b):
                see(c)
                go(b)
            case Par(l, r):
                go(l)
                go(r)
            case Cond(_, b):
                go(b)
            case AbsVarApp(_, names):
                for a in names:
                    see(a)
            case AbsApp(A, names):
                go_abs(A)
                for a in names:
                    see(a)

    def go_abs(A):
        for a in A.params:
            see(a)
        go(A.body)

    go(t)
    return best


def _binders(t, out: set):
    match t:
        case Res(c, b):
            out.add(c)
            _binders(b, out)
        case In(_, _, b) | Out(_, _, b) | RepIn(_, _, b) | RepOut(_, _, b) | Cond(_, b):
            _binders(b, out)
        case Par(l, r):
            _binders(l, out)
            _binders(r, out)
        case HoIn(_, _, _, b) | HoOut(_, _, _, b):
            _binders(b, out)
    return out


def apply_abstraction(A: Abstraction, names) -> object:
    """``A(a1..aj)``: the body with the parameters replaced by ``names``.

    Restrictions inside the body that would capture one of ``names`` are
    renamed apart first.
    """
    names = tuple(names)
    if len(names) != A.ty.param_count or len(A.params) != len(names):
        raise TypeError(f"abstraction of type {A.ty} applied to {len(names)} name(s)")
    mapping = dict(zip(A.params, names))
    targets = set(names)
    top = max([_max_name(A.body)] + [a.idx for a in names + A.params]) + 1
    for c in sorted(_binders(A.body, set()), key=lambda a: a.idx):
        if c in targets and c not in mapping:
            mapping[c] = Name(top)
            top += 1
    return rename_names(A.body, mapping)


def subst_abs(t, X: str, A: Abstraction):
    """``t{A/X}``: every application ``X(a1..aj)`` becomes the body ``A(a1..aj)``."""
    match t:
        case AbsVarApp(Y, names):
            return apply_abstraction(A, names) if Y == X else t
        case HoIn(a, Y, ty, b):
            return t if Y == X else HoIn(a, Y, ty, subst_abs(b, X, A))
        case HoOut(a, B, ty, b):
            return HoOut(a, B, ty, subst_abs(b, X, A))
        case In(a, x, b):
            return In(a, x, subst_abs(b, X, A))
        case Out(a, s, b):
            return Out(a, s, subst_abs(b, X, A))
        case RepIn(a, x, b):
            return RepIn(a, x, subst_abs(b, X, A))
        case RepOut(a, s, b):
            return RepOut(a, s, subst_abs(b, X, A))
        case Par(l, r):
            return Par(subst_abs(l, X, A), subst_abs(r, X, A))
        case Res(c, b):
            return Res(c, subst_abs(b, X, A))
        case Cond(phi, b):
            return Cond(phi, subst_abs(b, X, A))
    return t


# ---------------------------------------------------------- higher-order LTS


def _accepts(out_move, in_move) -> bool:
    ty, value = in_move[3], out_move[2]
    if isinstance(ty, AbsType):
        return isinstance(value, Abstraction) and value.ty == ty
    return not isinstance(value, Abstraction)


def ho_moves(t) -> list:
    match t:
        case Nil() | AbsVarApp() | Call():
            return []
        case In(a, x, b):
            return [("in", a, lambda v: subst_value(b, x, Num(v)), True)]
        case Out(a, s, b):
            return [("out", a, eval_term(s), b)]
        case RepIn(a, x, b):
            return [("in", a, lambda v: Par(subst_value(b, x, Num(v)), t), True)]
        case RepOut(a, s, b):
            return [("out", a, eval_term(s), Par(b, t))]
        case HoIn(a, X, ty, b):
            return [("in", a, lambda A: subst_abs(b, X, A), ty)]
        case HoOut(a, A, _, b):
            return [("out", a, A, b)]
        case Par(l, r):
            return par_moves(ho_moves(l), ho_moves(r), l, r, accepts=_accepts)
        case Res(c, b):
            return res_moves(ho_moves(b), c, lambda u: Res(c, u))
        case Cond(phi, b):
            return ho_moves(b) if decide(phi) else []
        case AbsApp(A, names):
            return ho_moves(apply_abstraction(A, names))
    raise TypeError(f"not a higher-order process term: {t!r}")


def _ho_free_names(t) -> frozenset:
    match t:
        case Nil() | Call():
            return frozenset()
        case In(a, _, b) | Out(a, _, b) | RepIn(a, _, b) | RepOut(a, _, b) | HoIn(a, _, _, b):
            return _ho_free_names(b) | {a}
        case HoOut(a, _, _, b):
            # a sent abstraction is closed: its globals are its parameters
            return _ho_free_names(b) | {a}
        case Par(l, r):
            return _ho_free_names(l) | _ho_free_names(r)
        case Res(c, b):
            return _ho_free_names(b) - {c}
        case Cond(_, b):
            return _ho_free_names(b)
        case AbsVarApp(_, names) | AbsApp(_, names):
            return frozenset(names)
    raise TypeError(f"not a higher-order process term: {t!r}")


def _ho_gc(t):
    match t:
        case Par(l, r):
            l, r = _ho_gc(l), _ho_gc(r)
            if isinstance(l, Nil):
                return r
            if isinstance(r, Nil):
                return l
            return Par(l, r)
        case Res(c, b):
            b = _ho_gc(b)
            if isinstance(b, Nil) or c not in _ho_free_names(b):
                return b
            return Res(c, b)
    return t


@dataclass(frozen=True)
class HoState:
    """A closed higher-order term, explored with a finite list of candidate inputs."""

    term: object
    candidates: tuple = field(default=(), compare=False, repr=False)

    def __str__(self):
        return format_term(self.term)

    def transitions(self, vbound: int = 1) -> list:
        return ho_transitions(self, vbound, self.candidates)


def ho_state(t, candidates=()) -> HoState:
    return HoState(desugar_term(t), tuple(candidates))


def ho_transitions(s, vbound: int = 1, candidates=()) -> list:
    """(action, successor) pairs; abstraction inputs range over ``candidates``."""
    term = s.term if isinstance(s, HoState) else desugar_term(s)
    out = []
    for m in ho_moves(term):
        if m[0] == "out":
            act = HoOutput if isinstance(m[2], Abstraction) else Output
            out.append((act(m[1], m[2]), m[3]))
        elif m[0] == "in" and isinstance(m[3], AbsType):
            out.extend((HoInput(m[1], A), m[2](A)) for A in candidates if A.ty == m[3])
        elif m[0] == "in":
            out.extend((Input(m[1], v), m[2](v)) for v in range(vbound + 1))
        else:
            out.append((Tau(m[2]), m[1]))
    return [(a, HoState(_ho_gc(t), tuple(candidates))) for a, t in out]


# ------------------------------------------------------------ code helpers


def abstraction_sig(A: Abstraction) -> TypeSig:
    return TypeSig(A.ty.local_count, tuple(A.params))


def encode_abstraction(A: Abstraction) -> int:
    """Program code of the body, parameters at placeholder indices 1..j."""
    if len(A.params) != A.ty.param_count:
        raise TypeError(f"abstraction has {len(A.params)} parameter(s) but type {A.ty}")
    p = Program(Dialect.VPC, (), desugar_term(A.body))
    return encode_program(normalize_program(p, abstraction_sig(A)))


def _dedupe(names) -> tuple:
    return tuple(dict.fromkeys(names))


def retarget_code(z: int, names) -> int:
    """Move the placeholder globals 1..j of program code ``z`` onto ``names``."""
    names = tuple(names)
    p = decode_program(z)
    fn = def_free_names(p.defs)
    free = set(free_names(p.main, fn))
    for d in p.defs:
        free |= fn[d.name]
    bad = sorted(a.idx for a in free if not 1 <= a.idx <= len(names))
    if bad:
        raise ValueError(f"placeholder n{bad[0]} outside 1..{len(names)}")
    bound = set()
    for t in [p.main] + [d.body for d in p.defs]:
        _binders(t, bound)
    if bound & free:
        raise ValueError("a placeholder is also used as a local name")
    mapping = {Name(m): a for m, a in enumerate(names, 1)}
    targets = set(names)
    top = max([len(names)] + [a.idx for a in names] + [c.idx for c in bound]) + 1
    for c in sorted(bound, key=lambda a: a.idx):
        if c in targets or c in mapping:
            mapping[c] = Name(top)
            top += 1
    defs = tuple(type(d)(d.name, d.params, rename_names(d.body, mapping)) for d in p.defs)
    return encode_program(Program(Dialect.VPC, defs, rename_names(p.main, mapping)))


# ------------------------------------------------------- wrapper processes


@dataclass(frozen=True)
class RetargetOut:
    """``'d(retarget(t; names)).0``; an unusable code is sent as the empty program."""

    chan: Name
    term: object
    names: tuple

    def moves(self):
        try:
            code = retarget_code(eval_term(self.term), self.names)
        except (CodecError, ValueError):
            code = 0
        return [("out", self.chan, code, NIL)]

    def free_vars(self):
        return vterm_vars(self.term)

    def subst(self, sub):
        return RetargetOut(self.chan, subst_vterm(self.term, sub), self.names)

    def free_names(self):
        return {self.chan}

    def format(self):
        names = ", ".join(str(a) for a in self.names)
        return f"'{self.chan}(retarget({format_vterm(self.term)}; {names})).0"


@dataclass(frozen=True)
class USeed:
    """Universal process waiting on ``chan`` for the code it should run."""

    chan: Name
    local_budget: int
    names: tuple

    def sig(self) -> TypeSig:
        return TypeSig(self.local_budget, _dedupe(self.names))

    def moves(self):
        return [("in", self.chan, lambda z: _wrap_config(boot_universal(z, self.sig())), True)]

    def free_vars(self):
        return set()

    def subst(self, sub):
        return self

    def free_names(self):
        return {self.chan, *self.names}

    def format(self):
        names = ",".join(str(a) for a in self.names)
        return f"U[{self.chan}; i={self.local_budget}; g={names}]"


@dataclass(frozen=True)
class UState:
    """A running universal-engine configuration embedded in a first-order term."""

    tree: object
    env: object

    def moves(self):
        env = self.env
        return [_lift(m, lambda u: _wrap_tree(u, env)) for m in resolved_moves(self.tree, env)]

    def free_vars(self):
        return set()

    def subst(self, sub):
        return self

    def free_names(self):
        return {self.env.resolve(i) for i in tree_free(self.tree, self.env)}

    def format(self):
        return "U" + render(self.tree, self.env)


def _wrap_tree(tree, env):
    tree = gc_tree(tree, env)
    return NIL if isinstance(tree, NilC) else UState(tree, env)


def _wrap_config(c: Config):
    return _wrap_tree(c.tree, c.env)


# -------------------------------------------------------------- translation


class _Translator:
    def __init__(self, t, env):
        self.next_var = 1 + max([v.idx for v in all_vars(t)] + [v.idx for v in env.values()] + [-1])
        self.chan = Name(_max_name(t) + 1)

    def fresh_var(self) -> VarId:
        x = VarId(self.next_var)
        self.next_var += 1
        return x

    def seed(self, term, local_budget, names):
        d = self.chan
        return Res(d, Par(RetargetOut(d, term, tuple(names)), USeed(d, local_budget, tuple(names))))

    def go(self, t, env, types):
        match t:
            case Nil() | Call():
                return t
            case In(a, x, b):
                return In(a, x, self.go(b, env, types))
            case Out(a, s, b):
                return Out(a, s, self.go(b, env, types))
            case RepIn(a, x, b):
                return RepIn(a, x, self.go(b, env, types))
            case RepOut(a, s, b):
                return RepOut(a, s, self.go(b, env, types))
            case Par(l, r):
                return Par(self.go(l, env, types), self.go(r, env, types))
            case Res(c, b):
                return Res(c, self.go(b, env, types))
            case Cond(phi, b):
                return Cond(phi, self.go(b, env, types))
            case HoIn(a, X, ty, b):
                x = self.fresh_var()
                return In(a, x, self.go(b, {**env, X: x}, {**types, X: ty}))
            case HoOut(a, A, ty, b):
                if A.ty != ty:
                    raise TypeError(f"abstraction of type {A.ty} sent at type {ty}")
                return Out(a, Num(encode_abstraction(A)), self.go(b, env, types))
            case AbsVarApp(X, names):
                if X not in env:
                    raise ValueError(f"unbound abstraction variable {X!r}")
                ty = types.get(X)
                if ty is not None and ty.param_count != len(names):
                    raise TypeError(f"{X} has type {ty} but is applied to {len(names)} name(s)")
                return self.seed(Var(env[X]), ty.local_count if ty else 0, names)
            case AbsApp(A, names):
                if A.ty.param_count != len(names):
                    raise TypeError(f"abstraction of type {A.ty} applied to {len(names)} name(s)")
                return self.seed(Num(encode_abstraction(A)), A.ty.local_count, names)
        raise TypeError(f"not a higher-order process term: {t!r}")


def translate(t, env=None, types=None):
    """First-order VPC term simulating the higher-order term ``t``.

    ``env`` maps free abstraction variables to the value variables that will
    carry their codes; ``types`` optionally gives their abstraction types.
    """
    env = dict(env or {})
    if len(set(env.values())) != len(env):
        raise ValueError("abstraction-variable environment must be injective")
    t = desugar_term(t)
    return _Translator(t, env).go(t, env, dict(types or {}))
