"""Evaluation of value terms and a decision procedure for Presburger sentences.

``decide`` eliminates quantifiers with Cooper's method, specialised to the
naturals: every eliminated variable carries the lower bound ``x >= 0``, so the
"minus infinity" disjunct is always false and only the B-set disjuncts remain.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

from .syntax import (
    Add, And, Bottom, Eq, Exists, Forall, Implies, Lt, Not, Num, Or, Top, Var, formula_vars,
    vterm_vars,
)


class OpenTermError(ValueError):
    """Raised when a term or formula that must be closed has free variables."""


def eval_term(t, env=None) -> int:
    match t:
        case Num(k):
            return k
        case Var(v):
            if env is None or v not in env:
                raise OpenTermError(f"free variable {v} in value term")
            return env[v]
        case Add(l, r):
            return eval_term(l, env) + eval_term(r, env)
    raise TypeError(f"not a value term: {t!r}")


# ----------------------------------------------------------- linear terms
#
# A linear term is (coeffs, const) with coeffs a sorted tuple of (var, c != 0).
# Atoms:  ("lt", lin)  lin < 0      ("eq", lin)  lin = 0
#         ("dvd", d, lin)  d | lin   ("ndvd", d, lin)  not d | lin
# Formulas: True, False, atoms, ("and", tuple), ("or", tuple).


def _lin(coeffs: dict, const: int):
    return tuple(sorted((v, c) for v, c in coeffs.items() if c)), const


def _lin_of_vterm(t, names) -> tuple:
    coeffs: dict = {}
    const = 0

    def go(s, sign):
        nonlocal const
        match s:
            case Num(k):
                const += sign * k
            case Var(v):
                if v not in names:
                    raise OpenTermError(f"free variable {v} in formula")
                key = names[v]
                coeffs[key] = coeffs.get(key, 0) + sign
            case Add(l, r):
                go(l, sign)
                go(r, sign)
            case _:
                raise TypeError(f"not a value term: {s!r}")

    go(t, 1)
    return coeffs, const


def _diff(s, t, names):
    cs, ks = _lin_of_vterm(s, names)
    ct, kt = _lin_of_vterm(t, names)
    for v, c in ct.items():
        cs[v] = cs.get(v, 0) - c
    return _lin(cs, ks - kt)


def _lin_neg(lin, extra=0):
    coeffs, k = lin
    return tuple((v, -c) for v, c in coeffs), -k + extra


def _mk_and(parts):
    out = []
    for p in parts:
        if p is False:
            return False
        if p is True:
            continue
        if isinstance(p, tuple) and p[0] == "and":
            out.extend(p[1])
        else:
            out.append(p)
    out = list(dict.fromkeys(out))
    if not out:
        return True
    return out[0] if len(out) == 1 else ("and", tuple(out))


def _mk_or(parts):
    out = []
    for p in parts:
        if p is True:
            return True
        if p is False:
            continue
        if isinstance(p, tuple) and p[0] == "or":
            out.extend(p[1])
        else:
            out.append(p)
    out = list(dict.fromkeys(out))
    if not out:
        return False
    return out[0] if len(out) == 1 else ("or", tuple(out))


def _atom(kind, lin, d=None):
    """Build an atom, folding it to a constant when it is ground."""
    coeffs, k = lin
    if kind in ("dvd", "ndvd"):
        if d == 1:
            return kind == "dvd"
        k %= d
        coeffs = tuple((v, c % d) for v, c in coeffs if c % d)
        if not coeffs:
            return (k == 0) == (kind == "dvd")
        return (kind, d, (coeffs, k))
    if not coeffs:
        return k < 0 if kind == "lt" else k == 0
    g = 0
    for _, c in coeffs:
        g = math.gcd(g, c)
    if kind == "eq":
        if k % g:
            return False
        return ("eq", (tuple((v, c // g) for v, c in coeffs), k // g))
    # g*y + k < 0  <=>  y + floor(k/g) < 0  over the integers
    return ("lt", (tuple((v, c // g) for v, c in coeffs), k // g))


def _nnf(phi, names, positive=True, fresh=None):
    """Translate to the internal form, pushing negations to the atoms.

    Quantifiers are returned as ("ex", var, body) nodes; universal quantifiers
    become negated existentials.
    """
    match phi:
        case Bottom():
            return not positive
        case Top():
            return positive
        case Not(b):
            return _nnf(b, names, not positive, fresh)
        case And(l, r):
            parts = [_nnf(l, names, positive, fresh), _nnf(r, names, positive, fresh)]
            return _mk_and(parts) if positive else _mk_or(parts)
        case Or(l, r):
            parts = [_nnf(l, names, positive, fresh), _nnf(r, names, positive, fresh)]
            return _mk_or(parts) if positive else _mk_and(parts)
        case Implies(l, r):
            parts = [_nnf(l, names, not positive, fresh), _nnf(r, names, positive, fresh)]
            return _mk_or(parts) if positive else _mk_and(parts)
        case Lt(s, t):
            lin = _diff(s, t, names)
            if positive:
                return _atom("lt", lin)
            # not (lin < 0)  <=>  -lin <= 0  <=>  -lin - 1 < 0
            return _atom("lt", _lin_neg(lin, -1))
        case Eq(s, t):
            lin = _diff(s, t, names)
            if positive:
                return _atom("eq", lin)
            return _mk_or([_atom("lt", lin), _atom("lt", _lin_neg(lin))])
        case Exists(v, b) | Forall(v, b):
            key = next(fresh)
            inner = dict(names)
            inner[v] = key
            universal = isinstance(phi, Forall)
            # forall x. b  ==  not exists x. not b
            body = _nnf(b, inner, not universal, fresh)
            node = ("ex", key, body)
            return node if positive != universal else ("not", node)
    raise TypeError(f"not a formula: {phi!r}")


def _subst(f, x, lin_coeffs, lin_const):
    """Replace variable ``x`` by the linear term (lin_coeffs, lin_const)."""
    if f is True or f is False:
        return f
    tag = f[0]
    if tag == "and":
        return _mk_and([_subst(g, x, lin_coeffs, lin_const) for g in f[1]])
    if tag == "or":
        return _mk_or([_subst(g, x, lin_coeffs, lin_const) for g in f[1]])
    if tag in ("dvd", "ndvd"):
        d, lin = f[1], f[2]
    else:
        d, lin = None, f[1]
    coeffs, k = lin
    cx = dict(coeffs).get(x, 0)
    if not cx:
        return f
    new = {v: c for v, c in coeffs if v != x}
    for v, c in lin_coeffs:
        new[v] = new.get(v, 0) + cx * c
    return _atom(tag, _lin(new, k + cx * lin_const), d)


def _coeff(atom, x):
    lin = atom[2] if atom[0] in ("dvd", "ndvd") else atom[1]
    return dict(lin[0]).get(x, 0)


def _atoms(f):
    if f is True or f is False:
        return
    if f[0] in ("and", "or"):
        for g in f[1]:
            yield from _atoms(g)
    else:
        yield f


def _scale(f, x, l):
    """Scale every atom so x's coefficient is +-l, then rename l*x to x."""
    if f is True or f is False:
        return f
    if f[0] == "and":
        return _mk_and([_scale(g, x, l) for g in f[1]])
    if f[0] == "or":
        return _mk_or([_scale(g, x, l) for g in f[1]])
    c = _coeff(f, x)
    if not c:
        return f
    m = l // abs(c)
    if f[0] in ("dvd", "ndvd"):
        d, (coeffs, k) = f[1], f[2]
    else:
        d, (coeffs, k) = None, f[1]
    new = {v: (1 if c > 0 else -1) if v == x else cv * m for v, cv in coeffs}
    lin = _lin(new, k * m)
    if d is not None:
        return (f[0], d * m, lin)
    return (f[0], lin)


def _eliminate(x, body):
    """Quantifier-free equivalent of ``exists x >= 0. body`` (body quantifier-free)."""
    # x >= 0  <=>  -x - 1 < 0
    f = _mk_and([body, ("lt", (((x, -1),), -1))])
    if f is True or f is False:
        return f
    coeffs = [abs(_coeff(a, x)) for a in _atoms(f) if _coeff(a, x)]
    if not coeffs:
        return f
    l = math.lcm(*coeffs)
    f = _scale(f, x, l)
    if l > 1:
        f = _mk_and([f, _atom("dvd", (((x, 1),), 0), l)])
    delta = 1
    bounds = []
    for a in _atoms(f):
        c = _coeff(a, x)
        if not c:
            continue
        tag = a[0]
        if tag in ("dvd", "ndvd"):
            delta = math.lcm(delta, a[1])
            continue
        rest = tuple((v, cv) for v, cv in a[1][0] if v != x)
        k = a[1][1]
        if tag == "lt" and c < 0:
            # -x + r < 0  <=>  x > r   : lower bound r
            bounds.append((rest, k))
        elif tag == "eq":
            # c*x + r = 0 with c = +-1 : x = -c*r, so the bound is x - 1
            sign = -c
            bounds.append((tuple((v, sign * cv) for v, cv in rest), sign * k - 1))
    out = []
    for coeffs_b, k_b in dict.fromkeys(bounds):
        for j in range(1, delta + 1):
            g = _subst(f, x, coeffs_b, k_b + j)
            if g is True:
                return True
            out.append(g)
    return _mk_or(out)


def _negate(f):
    if f is True or f is False:
        return not f
    tag = f[0]
    if tag == "and":
        return _mk_or([_negate(g) for g in f[1]])
    if tag == "or":
        return _mk_and([_negate(g) for g in f[1]])
    if tag == "lt":
        return _atom("lt", _lin_neg(f[1], -1))
    if tag == "eq":
        return _mk_or([_atom("lt", f[1]), _atom("lt", _lin_neg(f[1]))])
    if tag == "dvd":
        return ("ndvd", f[1], f[2])
    if tag == "ndvd":
        return ("dvd", f[1], f[2])
    raise ValueError(tag)


def _qe(f):
    if f is True or f is False:
        return f
    tag = f[0]
    if tag == "and":
        return _mk_and([_qe(g) for g in f[1]])
    if tag == "or":
        return _mk_or([_qe(g) for g in f[1]])
    if tag == "not":
        return _negate(_qe(f[1]))
    if tag == "ex":
        return _eliminate(f[1], _qe(f[2]))
    return f


@lru_cache(maxsize=65536)
def decide(phi) -> bool:
    """Truth of a closed Presburger sentence over the naturals."""
    if formula_vars(phi):
        raise OpenTermError(f"open formula: free {sorted(formula_vars(phi))}")
    result = _qe(_nnf(phi, {}, True, itertools.count()))
    if result is True or result is False:
        return result
    raise AssertionError(f"quantifier elimination left a residue: {result!r}")


def brute_decide(phi, bound: int, env=None) -> bool:
    """Evaluate ``phi`` with every quantifier ranging over ``0..bound``.

    Only a test oracle: it is wrong whenever a witness lies above ``bound``.
    """
    env = env or {}
    match phi:
        case Bottom():
            return False
        case Top():
            return True
        case Not(b):
            return not brute_decide(b, bound, env)
        case And(l, r):
            return brute_decide(l, bound, env) and brute_decide(r, bound, env)
        case Or(l, r):
            return brute_decide(l, bound, env) or brute_decide(r, bound, env)
        case Implies(l, r):
            return (not brute_decide(l, bound, env)) or brute_decide(r, bound, env)
        case Lt(s, t):
            return eval_term(s, env) < eval_term(t, env)
        case Eq(s, t):
            return eval_term(s, env) == eval_term(t, env)
        case Exists(v, b):
            return any(brute_decide(b, bound, {**env, v: i}) for i in range(bound + 1))
        case Forall(v, b):
            return all(brute_decide(b, bound, {**env, v: i}) for i in range(bound + 1))
    raise TypeError(f"not a formula: {phi!r}")


def is_closed_term(t) -> bool:
    return not vterm_vars(t)
