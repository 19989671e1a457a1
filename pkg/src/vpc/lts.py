"""Direct operational semantics of VPC and VPC! processes.

Transitions are first computed as *moves*, an intermediate form in which an
input has not yet committed to a value:

    ("out", chan, value, target)
    ("in", chan, make_target, bounded)     make_target(v) -> residual
    ("tau", target, defcall)

Composition synchronises an output with any matching input whatever the
value; only the inputs offered to the environment are cut at ``vbound``.
The universal engine reuses the same move format, so both semantics share
the composition and localization code below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .presburger import decide, eval_term
from .syntax import (
    Call, Cond, In, Name, Nil, Num, Out, Par, Program, RepIn, RepOut, Res, def_free_names,
    desugar, desugar_term, format_term, gc_term, instantiate, subst_value,
)

DEFAULT_FUEL = 64


class FuelExhausted(RuntimeError):
    """Too many nested unguarded definition unfoldings."""


# ------------------------------------------------------------------ actions


@dataclass(frozen=True)
class Input:
    chan: object
    value: int

    def __str__(self):
        return f"in {self.chan} {self.value}"


@dataclass(frozen=True)
class Output:
    chan: object
    value: int

    def __str__(self):
        return f"out {self.chan} {self.value}"


@dataclass(frozen=True)
class Tau:
    # set on the engine's definition-call steps; ignored by equality
    defcall: bool = field(default=False, compare=False)

    def __str__(self):
        return "tau (defcall)" if self.defcall else "tau"


TAU = Tau()


def is_tau(action) -> bool:
    return isinstance(action, Tau)


# ------------------------------------------------------- shared move algebra


def par_moves(left_moves, right_moves, left, right, mk_par=Par, accepts=None):
    """Interleavings of both sides followed by their synchronisations.

    ``accepts(out_move, in_move)``, when given, filters synchronisations on
    a matching channel (the higher-order calculus uses it for typing).
    """
    out = []
    for m in left_moves:
        out.append(_lift(m, lambda t: mk_par(t, right)))
    for m in right_moves:
        out.append(_lift(m, lambda t: mk_par(left, t)))
    for ml in left_moves:
        for mr in right_moves:
            if ml[0] == "out" and mr[0] == "in" and ml[1] == mr[1]:
                if accepts is None or accepts(ml, mr):
                    out.append(("tau", mk_par(ml[3], mr[2](ml[2])), False))
            elif ml[0] == "in" and mr[0] == "out" and ml[1] == mr[1]:
                if accepts is None or accepts(mr, ml):
                    out.append(("tau", mk_par(ml[2](mr[2]), mr[3]), False))
    return out


def res_moves(moves, chan, wrap):
    return [_lift(m, wrap) for m in moves if m[0] == "tau" or m[1] != chan]


def _lift(m, f):
    if m[0] == "out":
        return ("out", m[1], m[2], f(m[3]))
    if m[0] == "in":
        mk = m[2]
        return ("in", m[1], lambda v: f(mk(v)), m[3])
    return ("tau", f(m[1]), m[2])


def expand_moves(moves, vbound):
    """Turn moves into (action, target) pairs, offering inputs 0..vbound."""
    out = []
    for m in moves:
        if m[0] == "out":
            out.append((Output(m[1], m[2]), m[3]))
        elif m[0] == "in":
            for v in range(vbound + 1):
                out.append((Input(m[1], v), m[2](v)))
        else:
            out.append((Tau(m[2]), m[1]))
    return out


# ----------------------------------------------------------- direct states


@dataclass(frozen=True)
class DirectState:
    term: object
    defs: Mapping = field(default_factory=dict, compare=False, repr=False)

    def __str__(self):
        return format_term(self.term)

    def transitions(self, vbound: int = 1) -> list:
        return direct_transitions(self, vbound)


class DefTable(dict):
    """Definitions by name, with their free names precomputed."""

    def __init__(self, defs=()):
        super().__init__((d.name, d) for d in defs)
        self.free_names = def_free_names(self.values())
        self.fn_cache: dict = {}


def direct_state(p: Program, term=None) -> DirectState:
    """Start state for ``p`` (or for ``term`` under p's definitions), sugar removed."""
    p = desugar(p)
    return DirectState(p.main if term is None else desugar_term(term), DefTable(p.defs))


def term_moves(t, defs: Mapping, fuel: int = DEFAULT_FUEL, stack=()):
    match t:
        case Nil():
            return []
        case In(a, x, b):
            return [("in", a, lambda v: subst_value(b, x, Num(v)), True)]
        case Out(a, s, b):
            return [("out", a, eval_term(s), b)]
        case RepIn(a, x, b):
            return [("in", a, lambda v: Par(subst_value(b, x, Num(v)), t), True)]
        case RepOut(a, s, b):
            return [("out", a, eval_term(s), Par(b, t))]
        case Par(l, r):
            return par_moves(term_moves(l, defs, fuel, stack), term_moves(r, defs, fuel, stack),
                             l, r)
        case Res(c, b):
            return res_moves(term_moves(b, defs, fuel, stack), c, lambda u: Res(c, u))
        case Cond(phi, b):
            return term_moves(b, defs, fuel, stack) if decide(phi) else []
        case Call(name, args):
            d = defs.get(name)
            if d is None or d.arity != len(args):
                return []
            if t in stack:
                # re-entering the same instance without a guard adds nothing
                return []
            if len(stack) >= fuel:
                raise FuelExhausted(f"more than {fuel} nested unguarded unfoldings at {name}")
            # arguments are closed here; passing numerals keeps terms from growing
            vals = tuple(Num(eval_term(a)) for a in args)
            return term_moves(instantiate(d, vals), defs, fuel, stack + (t,))
    hook = getattr(t, "moves", None)
    if hook is None:
        raise TypeError(f"not a core process term: {t!r}")
    return hook()


def direct_transitions(s: DirectState, vbound: int = 1, fuel: int = DEFAULT_FUEL) -> list:
    """All (action, successor) pairs of ``s`` in deterministic order."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    defs = s.defs if isinstance(s.defs, DefTable) else DefTable(s.defs.values())
    moves = term_moves(s.term, defs, fuel)
    return [(a, DirectState(gc_term(t, defs.free_names, defs.fn_cache), defs))
            for a, t in expand_moves(moves, vbound)]


def format_action(a) -> str:
    return str(a)


def channel_text(chan) -> str:
    return str(chan) if isinstance(chan, Name) else f"n{chan}"
