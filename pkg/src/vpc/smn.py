"""Indices of parametric definitions, their universal family, and S-m-n.

A definition index packages a whole mutually recursive system together with
the position of the definition it denotes::

    <m, <system code, j>>

where the system code is the m-ary pairing of the definition tuples used in
program codes.  Bodies are normalized for the type signature before they are
encoded, so the index only depends on the system up to renaming of names.
"""

from __future__ import annotations

from .checker import check_program, normalize_program
from .godel import CodecError, decode_system, encode_system, encode_term, pair2, unpair2
from .syntax import NIL, Call, Dialect, Num, ParamDef, Program, TypeSig, calls_in, desugar, subst_many
from .universal import Config, Sim, nil_config, program_env


def _system_program(system) -> Program:
    return desugar(Program(Dialect.VPC, tuple(system), NIL))


def encode_def(system, target, sig: TypeSig) -> int:
    """Index of definition ``target`` (a name or a ParamDef) within ``system``."""
    system = tuple(system)
    name = target.name if isinstance(target, ParamDef) else target
    positions = {d.name: j for j, d in enumerate(system, 1)}
    if name not in positions:
        raise ValueError(f"definition {name!r} is not part of the system")
    p = _system_program(system)
    v = check_program(p, sig)
    if v is not None:
        raise ValueError(f"definition system is not of type [{sig}]: {v}")
    p = normalize_program(p, sig)
    return pair2(len(system), pair2(encode_system(p.defs, positions), positions[name]))


def decode_def_index(z: int) -> tuple:
    """(definitions named D1..Dm, target position j); CodecError if j is out of range."""
    m, rest = unpair2(z)
    code, j = unpair2(rest)
    if not 1 <= j <= m:
        raise CodecError(f"target position {j} outside a system of {m} definition(s)")
    return decode_system(code, m), j


def universal_def(z: int, args, sig: TypeSig) -> Config:
    """Engine configuration behaving as the z-th definition applied to ``args``.

    Ill-formed indices, arity mismatches and ill-typed systems all give the
    nil configuration.
    """
    try:
        defs, j = decode_def_index(z)
    except CodecError:
        return nil_config(sig)
    args = tuple(args)
    if defs[j - 1].arity != len(args):
        return nil_config(sig)
    p = _system_program(defs)
    if check_program(p, sig) is not None:
        return nil_config(sig)
    p = normalize_program(p, sig)
    call = Call(f"D{j}", tuple(Num(v) for v in args))
    return Config(Sim(encode_term(call, Dialect.VPC)), program_env(p, sig))


def _referenced(defs, name: str) -> bool:
    return any(c.name == name for d in defs for c in calls_in(d.body))


def smn(z: int, k0: int, k1: int, vals) -> int:
    """Index of the k1-ary partial application of definition ``z`` to ``vals``.

    The first ``k0`` parameters are replaced by numerals.  When nothing in
    the system calls the target it is rewritten in place; otherwise the
    residual definition is appended, so recursive calls still reach the
    original.
    """
    vals = tuple(vals)
    if len(vals) != k0:
        raise ValueError(f"expected {k0} value(s), got {len(vals)}")
    defs, j = decode_def_index(z)
    target = defs[j - 1]
    if target.arity != k0 + k1:
        raise ValueError(f"definition has arity {target.arity}, not {k0}+{k1}")
    sub: dict = {}
    for x, v in zip(target.params[:k0], vals):
        sub.setdefault(x, Num(v))
    body = subst_many(target.body, sub)
    rest = target.params[k0:]
    if _referenced(defs, target.name):
        j = len(defs) + 1
        defs = defs + (ParamDef(f"D{j}", rest, body),)
    else:
        defs = defs[:j - 1] + (ParamDef(target.name, rest, body),) + defs[j:]
    return pair2(len(defs), pair2(encode_system(defs), j))
