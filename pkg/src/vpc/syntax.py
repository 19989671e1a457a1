"""Abstract syntax for VPC and VPC! terms, plus the static operations on it.

Names and variables are identified by their natural-number index only; the
display strings ``n{k}`` and ``x{k}`` are a presentation concern.  Terms are
immutable and hashable so they can serve directly as LTS states.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union


def hash_cached(cls):
    """Give a frozen dataclass an O(1) hash and a non-recursive equality.

    Exploration builds states that are deep trees sharing most of their
    subterms.  The hash is computed once at construction from the children's
    stored hashes, and equality walks both trees with an explicit stack, so
    neither ever recurses on the Python stack.
    """
    names = tuple(f.name for f in dataclasses.fields(cls))
    base_init = cls.__init__
    tag = cls.__qualname__

    def __init__(self, *args, **kwargs):
        base_init(self, *args, **kwargs)
        object.__setattr__(self, "_hash", hash((tag,) + tuple(getattr(self, n) for n in names)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if other.__class__ is not self.__class__:
            return NotImplemented
        return _deep_eq(self, other)

    cls.__init__ = __init__
    cls.__hash__ = __hash__
    cls.__eq__ = __eq__
    cls._eq_fields = names
    return cls


def _deep_eq(a, b) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if x.__class__ is not y.__class__:
            return False
        fields_ = getattr(x.__class__, "_eq_fields", None)
        if fields_ is not None:
            if x._hash != y._hash:
                return False
            stack.extend((getattr(x, n), getattr(y, n)) for n in fields_)
        elif isinstance(x, tuple):
            if len(x) != len(y):
                return False
            stack.extend(zip(x, y))
        elif x != y:
            return False
    return True


class Dialect(enum.Enum):
    """Which calculus a term belongs to; also selects the Gödel modulus."""

    VPC = "p"
    BANG = "bang"

    @property
    def modulus(self) -> int:
        return 6 if self is Dialect.VPC else 7


@dataclass(frozen=True, order=True)
class Name:
    idx: int

    def __str__(self) -> str:
        return f"n{self.idx}"


@dataclass(frozen=True, order=True)
class VarId:
    idx: int

    def __str__(self) -> str:
        return f"x{self.idx}"


# ---------------------------------------------------------------- value terms


@dataclass(frozen=True)
class Num:
    k: int


@dataclass(frozen=True)
class Var:
    v: VarId


@hash_cached
@dataclass(frozen=True)
class Add:
    left: "ValueTerm"
    right: "ValueTerm"


ValueTerm = Union[Num, Var, Add]


def succ(t: ValueTerm) -> ValueTerm:
    return Add(t, Num(1))


# ------------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Top:
    pass


@hash_cached
@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@hash_cached
@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@hash_cached
@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@hash_cached
@dataclass(frozen=True)
class Exists:
    v: VarId
    body: "Formula"


@hash_cached
@dataclass(frozen=True)
class Forall:
    v: VarId
    body: "Formula"


@hash_cached
@dataclass(frozen=True)
class Lt:
    left: ValueTerm
    right: ValueTerm


@hash_cached
@dataclass(frozen=True)
class Eq:
    left: ValueTerm
    right: ValueTerm


@dataclass(frozen=True)
class Not:
    """Surface negation; desugars to ``Implies(body, Bottom())``."""

    body: "Formula"


Formula = Union[Bottom, Top, And, Or, Implies, Exists, Forall, Lt, Eq, Not]

FALSE = Bottom()
TRUE = Top()


def negate(phi: Formula) -> Formula:
    return Implies(phi, FALSE)


# ---------------------------------------------------------------- process terms


@dataclass(frozen=True)
class Nil:
    pass


@hash_cached
@dataclass(frozen=True)
class In:
    chan: Name
    var: VarId
    body: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class Out:
    chan: Name
    term: ValueTerm
    body: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class Par:
    left: "ProcTerm"
    right: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class Res:
    name: Name
    body: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class Cond:
    cond: Formula
    body: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class Call:
    name: str
    args: tuple = ()


@hash_cached
@dataclass(frozen=True)
class RepIn:
    chan: Name
    var: VarId
    body: "ProcTerm"


@hash_cached
@dataclass(frozen=True)
class RepOut:
    chan: Name
    term: ValueTerm
    body: "ProcTerm"


# surface sugar, removed by desugar()


@dataclass(frozen=True)
class IfElse:
    cond: Formula
    then: "ProcTerm"
    orelse: "ProcTerm"


@dataclass(frozen=True)
class Case:
    """``case t [as x] of phi0 => T0; ...; phik => Tk end``.

    With a binder ``x`` every arm is read with ``t`` substituted for ``x``.
    """

    term: ValueTerm
    var: Optional[VarId]
    arms: tuple  # of (Formula, ProcTerm)


@dataclass(frozen=True)
class Let:
    var: VarId
    term: ValueTerm
    body: "ProcTerm"


# higher-order forms (only built by the higher-order front end)


@dataclass(frozen=True)
class AbsType:
    local_count: int
    param_count: int

    def __str__(self) -> str:
        return f"<{self.local_count},{self.param_count}>"


@dataclass(frozen=True)
class Abstraction:
    params: tuple  # of Name placeholders
    body: "ProcTerm"
    ty: AbsType


@dataclass(frozen=True)
class AbsVarApp:
    var: str
    names: tuple


@dataclass(frozen=True)
class AbsApp:
    abstraction: Abstraction
    names: tuple


@dataclass(frozen=True)
class HoIn:
    chan: Name
    var: str
    ty: AbsType
    body: "ProcTerm"


@dataclass(frozen=True)
class HoOut:
    chan: Name
    abstraction: Abstraction
    ty: AbsType
    body: "ProcTerm"


ProcTerm = Union[Nil, In, Out, Par, Res, Cond, Call, RepIn, RepOut,
                 IfElse, Case, Let, AbsVarApp, AbsApp, HoIn, HoOut]

NIL = Nil()

_PREFIXES = (In, Out, RepIn, RepOut)
_REPLICATED = (RepIn, RepOut)


@dataclass(frozen=True)
class ParamDef:
    name: str
    params: tuple  # of VarId
    body: ProcTerm

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class Program:
    dialect: Dialect
    defs: tuple  # of ParamDef
    main: ProcTerm
    symtab: Mapping = field(default_factory=dict, compare=False, hash=False, repr=False)

    def lookup(self, name: str) -> Optional[ParamDef]:
        for d in self.defs:
            if d.name == name:
                return d
        return None

    def position(self, name: str) -> int:
        """1-based position of definition ``name``."""
        for j, d in enumerate(self.defs, 1):
            if d.name == name:
                return j
        raise KeyError(name)


@dataclass(frozen=True)
class TypeSig:
    """The budget ``[i, globals]`` a universal process is built for."""

    local_budget: int
    globals: tuple  # of Name

    def __post_init__(self):
        if len(set(self.globals)) != len(self.globals):
            raise ValueError("duplicate global name in type signature")

    @property
    def k(self) -> int:
        return len(self.globals)

    def __str__(self) -> str:
        return f"i={self.local_budget};g=" + ",".join(str(a) for a in self.globals)


# ---------------------------------------------------------------- free variables


def vterm_vars(t: ValueTerm) -> set:
    match t:
        case Num():
            return set()
        case Var(v):
            return {v}
        case Add(l, r):
            return vterm_vars(l) | vterm_vars(r)
    return set(t.free_vars())


def formula_vars(phi: Formula) -> set:
    match phi:
        case Bottom() | Top():
            return set()
        case And(l, r) | Or(l, r) | Implies(l, r):
            return formula_vars(l) | formula_vars(r)
        case Exists(v, b) | Forall(v, b):
            return formula_vars(b) - {v}
        case Lt(s, t) | Eq(s, t):
            return vterm_vars(s) | vterm_vars(t)
        case Not(b):
            return formula_vars(b)
    raise TypeError(f"not a formula: {phi!r}")


def free_vars(t: ProcTerm) -> set:
    """Value variables of ``t`` not bound by an enclosing input."""
    match t:
        case Nil() | AbsVarApp():
            return set()
        case In(_, x, b) | RepIn(_, x, b):
            return free_vars(b) - {x}
        case Out(_, s, b) | RepOut(_, s, b):
            return vterm_vars(s) | free_vars(b)
        case Par(l, r):
            return free_vars(l) | free_vars(r)
        case Res(_, b):
            return free_vars(b)
        case Cond(phi, b):
            return formula_vars(phi) | free_vars(b)
        case Call(_, args):
            out = set()
            for a in args:
                out |= vterm_vars(a)
            return out
        case IfElse(phi, s, u):
            return formula_vars(phi) | free_vars(s) | free_vars(u)
        case Case(s, x, arms):
            out = set()
            for phi, body in arms:
                out |= formula_vars(phi) | free_vars(body)
            if x is not None:
                out.discard(x)
            return out | vterm_vars(s)
        case Let(x, s, b):
            return vterm_vars(s) | (free_vars(b) - {x})
        case AbsApp(a, _):
            return free_vars(a.body)
        case HoIn(_, _, _, b):
            return free_vars(b)
        case HoOut(_, a, _, b):
            return free_vars(a.body) | free_vars(b)
    return set(t.free_vars())


def all_vars(t: ProcTerm) -> set:
    """Every variable index occurring in ``t``, bound or free."""
    out = set()

    def vt(s):
        match s:
            case Var(v):
                out.add(v)
            case Add(l, r):
                vt(l)
                vt(r)

    def fm(phi):
        match phi:
            case And(l, r) | Or(l, r) | Implies(l, r):
                fm(l)
                fm(r)
            case Exists(v, b) | Forall(v, b):
                out.add(v)
                fm(b)
            case Lt(s, u) | Eq(s, u):
                vt(s)
                vt(u)
            case Not(b):
                fm(b)

    def go(p):
        match p:
            case In(_, x, b) | RepIn(_, x, b):
                out.add(x)
                go(b)
            case Out(_, s, b) | RepOut(_, s, b):
                vt(s)
                go(b)
            case Par(l, r):
                go(l)
                go(r)
            case Res(_, b):
                go(b)
            case Cond(phi, b):
                fm(phi)
                go(b)
            case Call(_, args):
                for a in args:
                    vt(a)
            case IfElse(phi, s, u):
                fm(phi)
                go(s)
                go(u)
            case Case(s, x, arms):
                vt(s)
                if x is not None:
                    out.add(x)
                for phi, b in arms:
                    fm(phi)
                    go(b)
            case Let(x, s, b):
                out.add(x)
                vt(s)
                go(b)
            case AbsApp(a, _):
                go(a.body)
            case HoIn(_, _, _, b):
                go(b)
            case HoOut(_, a, _, b):
                go(a.body)
                go(b)

    go(t)
    return out


# --------------------------------------------------------------------- names


@dataclass(frozen=True)
class Analysis:
    free_vars: frozenset
    global_names: tuple
    local_count: int
    local_names: tuple = ()


def analyze(t: ProcTerm) -> Analysis:
    """Static counts used by the type discipline ``[i, globals]``.

    ``local_count`` counts distinct name identities bound by a restriction,
    so ``(n2)(... | (n2)(n3)...)`` has two local names, not three.
    """
    globals_: dict = {}
    locals_: dict = {}

    def go(p, bound):
        match p:
            case Nil() | Call() | AbsVarApp():
                return
            case In(a, _, b) | Out(a, _, b) | RepIn(a, _, b) | RepOut(a, _, b) | HoIn(a, _, _, b):
                if a not in bound:
                    globals_.setdefault(a, None)
                go(b, bound)
            case HoOut(a, _, _, b):
                if a not in bound:
                    globals_.setdefault(a, None)
                go(b, bound)
            case Par(l, r):
                go(l, bound)
                go(r, bound)
            case Res(c, b):
                locals_.setdefault(c, None)
                go(b, bound | {c})
            case Cond(_, b) | Let(_, _, b):
                go(b, bound)
            case IfElse(_, s, u):
                go(s, bound)
                go(u, bound)
            case Case(_, _, arms):
                for _, b in arms:
                    go(b, bound)
            case AbsApp(a, names):
                for n in names:
                    if n not in bound:
                        globals_.setdefault(n, None)
            case _:
                raise TypeError(f"not a process term: {p!r}")

    go(t, frozenset())
    return Analysis(frozenset(free_vars(t)), tuple(globals_), len(locals_), tuple(locals_))


def names_in(t: ProcTerm) -> set:
    """All name identities occurring in ``t`` (free, bound or binding)."""
    out = set()

    def go(p):
        match p:
            case In(a, _, b) | Out(a, _, b) | RepIn(a, _, b) | RepOut(a, _, b):
                out.add(a)
                go(b)
            case Res(c, b):
                out.add(c)
                go(b)
            case Par(l, r) | IfElse(_, l, r):
                go(l)
                go(r)
            case Cond(_, b) | Let(_, _, b):
                go(b)
            case Case(_, _, arms):
                for _, b in arms:
                    go(b)

    go(t)
    return out


def rename_names(t: ProcTerm, mapping: Mapping) -> ProcTerm:
    """Apply ``mapping`` uniformly to every name occurrence, binders included.

    No capture avoidance happens here; with an injective mapping the
    transition structure is preserved exactly up to relabelling.
    """

    def r(a):
        return mapping.get(a, a)

    def go(p):
        match p:
            case Nil() | Call():
                return p
            case In(a, x, b):
                return In(r(a), x, go(b))
            case Out(a, s, b):
                return Out(r(a), s, go(b))
            case RepIn(a, x, b):
                return RepIn(r(a), x, go(b))
            case RepOut(a, s, b):
                return RepOut(r(a), s, go(b))
            case Par(left, right):
                return Par(go(left), go(right))
            case Res(c, b):
                return Res(r(c), go(b))
            case Cond(phi, b):
                return Cond(phi, go(b))
            case IfElse(phi, s, u):
                return IfElse(phi, go(s), go(u))
            case Case(s, x, arms):
                return Case(s, x, tuple((phi, go(b)) for phi, b in arms))
            case Let(x, s, b):
                return Let(x, s, go(b))
        raise TypeError(f"cannot rename names in {type(p).__name__}")

    return go(t)


# --------------------------------------------------------------- substitution


def subst_vterm(t: ValueTerm, sub: Mapping) -> ValueTerm:
    match t:
        case Num():
            return t
        case Var(v):
            return sub.get(v, t)
        case Add(l, r):
            return Add(subst_vterm(l, sub), subst_vterm(r, sub))
    return t.subst(sub)


def subst_formula(phi: Formula, sub: Mapping) -> Formula:
    if not sub:
        return phi
    match phi:
        case Bottom() | Top():
            return phi
        case And(l, r):
            return And(subst_formula(l, sub), subst_formula(r, sub))
        case Or(l, r):
            return Or(subst_formula(l, sub), subst_formula(r, sub))
        case Implies(l, r):
            return Implies(subst_formula(l, sub), subst_formula(r, sub))
        case Exists(v, b):
            return Exists(v, subst_formula(b, _without(sub, v)))
        case Forall(v, b):
            return Forall(v, subst_formula(b, _without(sub, v)))
        case Lt(s, u):
            return Lt(subst_vterm(s, sub), subst_vterm(u, sub))
        case Eq(s, u):
            return Eq(subst_vterm(s, sub), subst_vterm(u, sub))
        case Not(b):
            return Not(subst_formula(b, sub))
    raise TypeError(f"not a formula: {phi!r}")


def _without(sub, v):
    if v in sub:
        sub = dict(sub)
        del sub[v]
    return sub


def subst_many(t: ProcTerm, sub: Mapping) -> ProcTerm:
    """Simultaneous substitution ``t{s1/x1, ...}`` of value terms for variables.

    Occurrences under an input that rebinds a variable are left alone.  The
    substituted terms are expected to be closed, so nothing can be captured.
    """
    if not sub:
        return t
    match t:
        case Nil() | AbsVarApp():
            return t
        case In(a, x, b):
            return In(a, x, subst_many(b, _without(sub, x)))
        case RepIn(a, x, b):
            return RepIn(a, x, subst_many(b, _without(sub, x)))
        case Out(a, s, b):
            return Out(a, subst_vterm(s, sub), subst_many(b, sub))
        case RepOut(a, s, b):
            return RepOut(a, subst_vterm(s, sub), subst_many(b, sub))
        case Par(l, r):
            return Par(subst_many(l, sub), subst_many(r, sub))
        case Res(c, b):
            return Res(c, subst_many(b, sub))
        case Cond(phi, b):
            return Cond(subst_formula(phi, sub), subst_many(b, sub))
        case Call(d, args):
            return Call(d, tuple(subst_vterm(a, sub) for a in args))
        case IfElse(phi, s, u):
            return IfElse(subst_formula(phi, sub), subst_many(s, sub), subst_many(u, sub))
        case Case(s, x, arms):
            inner = _without(sub, x) if x is not None else sub
            return Case(subst_vterm(s, sub), x,
                        tuple((subst_formula(phi, inner), subst_many(b, inner)) for phi, b in arms))
        case Let(x, s, b):
            return Let(x, subst_vterm(s, sub), subst_many(b, _without(sub, x)))
        case AbsApp(a, names):
            return AbsApp(Abstraction(a.params, subst_many(a.body, sub), a.ty), names)
        case HoIn(a, X, ty, b):
            return HoIn(a, X, ty, subst_many(b, sub))
        case HoOut(a, A, ty, b):
            return HoOut(a, Abstraction(A.params, subst_many(A.body, sub), A.ty), ty, subst_many(b, sub))
    return t.subst(sub)


def subst_value(t: ProcTerm, v: VarId, s: ValueTerm) -> ProcTerm:
    """``t{s/v}``."""
    return subst_many(t, {v: s})


def instantiate(d: ParamDef, args: Iterable[ValueTerm]) -> ProcTerm:
    """Body of ``d`` with ``args`` substituted for its parameters.

    When a parameter is repeated the first argument for it wins.
    """
    sub: dict = {}
    for x, a in zip(d.params, args):
        sub.setdefault(x, a)
    return subst_many(d.body, sub)


# ------------------------------------------------------------------- desugar


def desugar_formula(phi: Formula) -> Formula:
    match phi:
        case Bottom() | Top() | Lt() | Eq():
            return phi
        case And(l, r):
            return And(desugar_formula(l), desugar_formula(r))
        case Or(l, r):
            return Or(desugar_formula(l), desugar_formula(r))
        case Implies(l, r):
            return Implies(desugar_formula(l), desugar_formula(r))
        case Exists(v, b):
            return Exists(v, desugar_formula(b))
        case Forall(v, b):
            return Forall(v, desugar_formula(b))
        case Not(b):
            return negate(desugar_formula(b))
    raise TypeError(f"not a formula: {phi!r}")


def desugar_term(t: ProcTerm) -> ProcTerm:
    match t:
        case Nil() | Call() | AbsVarApp():
            return t
        case In(a, x, b):
            return In(a, x, desugar_term(b))
        case Out(a, s, b):
            return Out(a, s, desugar_term(b))
        case RepIn(a, x, b):
            return RepIn(a, x, desugar_term(b))
        case RepOut(a, s, b):
            return RepOut(a, s, desugar_term(b))
        case Par(l, r):
            return Par(desugar_term(l), desugar_term(r))
        case Res(c, b):
            return Res(c, desugar_term(b))
        case Cond(phi, b):
            return Cond(desugar_formula(phi), desugar_term(b))
        case IfElse(phi, s, u):
            phi = desugar_formula(phi)
            return Par(Cond(phi, desugar_term(s)), Cond(negate(phi), desugar_term(u)))
        case Case(s, x, arms):
            arms = [(desugar_formula(phi), desugar_term(b)) for phi, b in arms]
            if x is not None:
                arms = [(subst_formula(phi, {x: s}), subst_value(b, x, s)) for phi, b in arms]
            if not arms:
                return NIL
            phi, body = arms[-1]
            out = Cond(phi, body)
            for phi, body in reversed(arms[:-1]):
                out = Par(Cond(phi, body), Cond(negate(phi), out))
            return out
        case Let(x, s, b):
            return subst_value(desugar_term(b), x, s)
        case AbsApp(a, names):
            return AbsApp(Abstraction(a.params, desugar_term(a.body), a.ty), names)
        case HoIn(a, X, ty, b):
            return HoIn(a, X, ty, desugar_term(b))
        case HoOut(a, A, ty, b):
            return HoOut(a, Abstraction(A.params, desugar_term(A.body), A.ty), ty, desugar_term(b))
    raise TypeError(f"not a process term: {t!r}")


def desugar(p: Program) -> Program:
    defs = tuple(ParamDef(d.name, d.params, desugar_term(d.body)) for d in p.defs)
    return Program(p.dialect, defs, desugar_term(p.main), p.symtab)


def is_core(t: ProcTerm) -> bool:
    """True when ``t`` is free of surface sugar."""
    return desugar_term(t) == t


# ------------------------------------------------------- derived replication


def derive_replication(p: Program) -> Program:
    """Replace every ``!a(x).S`` / ``!'a(t).T`` by a fresh recursive definition.

    ``!a(x).S`` becomes ``C(xs)`` with ``C(xs) = a(x).S | C(xs)`` where ``xs``
    lists the free variables of the replicated term in index order.
    """
    p = desugar(p)
    defs = list(p.defs)
    taken = {d.name for d in defs}

    def fresh():
        j = len(defs) + 1
        while f"D{j}" in taken:
            j += 1
        taken.add(f"D{j}")
        return f"D{j}"

    def go(t):
        match t:
            case Nil() | Call():
                return t
            case In(a, x, b):
                return In(a, x, go(b))
            case Out(a, s, b):
                return Out(a, s, go(b))
            case Par(l, r):
                return Par(go(l), go(r))
            case Res(c, b):
                return Res(c, go(b))
            case Cond(phi, b):
                return Cond(phi, go(b))
            case RepIn(a, x, b):
                once = In(a, x, go(b))
            case RepOut(a, s, b):
                once = Out(a, s, go(b))
            case _:
                raise TypeError(f"not a core term: {t!r}")
        params = tuple(sorted(free_vars(once)))
        name = fresh()
        call = Call(name, tuple(Var(x) for x in params))
        defs.append(ParamDef(name, params, Par(once, call)))
        return call

    new_defs = [ParamDef(d.name, d.params, go(d.body)) for d in p.defs]
    main = go(p.main)
    defs[:len(new_defs)] = new_defs
    return Program(Dialect.VPC, tuple(defs), main, p.symtab)


def has_replication(t: ProcTerm) -> bool:
    match t:
        case RepIn() | RepOut():
            return True
        case In(_, _, b) | Out(_, _, b) | Res(_, b) | Cond(_, b) | Let(_, _, b):
            return has_replication(b)
        case Par(l, r) | IfElse(_, l, r):
            return has_replication(l) or has_replication(r)
        case Case(_, _, arms):
            return any(has_replication(b) for _, b in arms)
    return False


def calls_in(t: ProcTerm) -> list:
    out = []

    def go(p):
        match p:
            case Call():
                out.append(p)
            case In(_, _, b) | Out(_, _, b) | RepIn(_, _, b) | RepOut(_, _, b) | Res(_, b) \
                    | Cond(_, b) | Let(_, _, b):
                go(b)
            case Par(l, r) | IfElse(_, l, r):
                go(l)
                go(r)
            case Case(_, _, arms):
                for _, b in arms:
                    go(b)

    go(t)
    return out


# ------------------------------------------------------------ pretty printing


def format_vterm(t: ValueTerm) -> str:
    match t:
        case Num(k):
            return str(k)
        case Var(v):
            return str(v)
        case Add(l, r):
            right = format_vterm(r)
            if isinstance(r, Add):
                right = f"({right})"
            return f"{format_vterm(l)} + {right}"
    return str(t)


# precedence: 0 implies, 1 or, 2 and, 3 unary/atoms
def format_formula(phi: Formula, prec: int = 0) -> str:
    match phi:
        case Bottom():
            return "ff"
        case Top():
            return "tt"
        case Lt(s, t):
            return f"{format_vterm(s)} < {format_vterm(t)}"
        case Eq(s, t):
            return f"{format_vterm(s)} = {format_vterm(t)}"
        case Not(b):
            return "~" + format_formula(b, 3)
        case And(l, r):
            text, mine = f"{format_formula(l, 2)} /\\ {format_formula(r, 3)}", 2
        case Or(l, r):
            text, mine = f"{format_formula(l, 1)} \\/ {format_formula(r, 2)}", 1
        case Implies(l, r):
            text, mine = f"{format_formula(l, 1)} => {format_formula(r, 0)}", 0
        case Exists(v, b):
            text, mine = f"exists {v}. {format_formula(b, 0)}", -1
        case Forall(v, b):
            text, mine = f"forall {v}. {format_formula(b, 0)}", -1
        case _:
            raise TypeError(f"not a formula: {phi!r}")
    return text if mine >= prec else f"({text})"


def format_term(t: ProcTerm, prec: int = 0) -> str:
    """Render ``t`` in the concrete syntax accepted by :func:`vpc.parser.parse_source`."""
    match t:
        case Nil():
            return "0"
        case Par(l, r):
            text = f"{format_term(l, 0)} | {format_term(r, 1)}"
            return text if prec == 0 else f"({text})"
        case In(a, x, b):
            return f"{a}({x}).{format_term(b, 1)}"
        case Out(a, s, b):
            return f"'{a}({format_vterm(s)}).{format_term(b, 1)}"
        case RepIn(a, x, b):
            return f"!{a}({x}).{format_term(b, 1)}"
        case RepOut(a, s, b):
            return f"!'{a}({format_vterm(s)}).{format_term(b, 1)}"
        case Res(c, b):
            return f"({c}){format_term(b, 1)}"
        case Cond(phi, b):
            return f"if {format_formula(phi)} then {format_term(b, 1)}"
        case IfElse(phi, s, u):
            return f"if {format_formula(phi)} then {format_term(s, 1)} else {format_term(u, 1)}"
        case Let(x, s, b):
            return f"let {x} = {format_vterm(s)} in {format_term(b, 1)}"
        case Case(s, x, arms):
            head = f"case {format_vterm(s)}" + (f" as {x}" if x is not None else "") + " of"
            body = " ".join(f"{format_formula(phi, 1)} => {format_term(b, 1)};" for phi, b in arms)
            return f"{head} {body} end"
        case Call(d, args):
            return f"{d}({', '.join(format_vterm(a) for a in args)})"
        case AbsVarApp(X, names):
            return f"{X}({', '.join(str(a) for a in names)})"
        case AbsApp(A, names):
            return f"({format_abstraction(A)})({', '.join(str(a) for a in names)})"
        case HoIn(a, X, ty, b):
            return f"{a}({X}:{ty}).{format_term(b, 1)}"
        case HoOut(a, A, ty, b):
            return f"'{a}({format_abstraction(A)}).{format_term(b, 1)}"
    fmt = getattr(t, "format", None)
    if fmt is None:
        raise TypeError(f"not a process term: {t!r}")
    return fmt()


def format_abstraction(A: Abstraction) -> str:
    params = " ".join(str(a) for a in A.params)
    return f"lambda {params}. {format_term(A.body, 0)} : {A.ty}"


def format_program(p: Program) -> str:
    lines = []
    for d in p.defs:
        params = ", ".join(str(x) for x in d.params)
        lines.append(f"def {d.name}({params}) = {format_term(d.body)}")
    lines.append(f"main = {format_term(p.main)}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- free names


def free_names(t, def_fn: Mapping = None, cache: dict = None) -> frozenset:
    """Names a term can use as channels without binding them first.

    ``def_fn`` gives the free names of each definition; a call contributes
    those, since unfolding happens by textual substitution under whatever
    restrictions surround the call.  ``cache`` memoises results per subterm.
    """
    if cache is not None:
        # keyed by identity: states share most subterms, and structural
        # lookups would compare whole trees
        hit = cache.get(id(t))
        if hit is not None and hit[0] is t:
            return hit[1]
    match t:
        case Nil():
            out = frozenset()
        case In(a, _, b) | Out(a, _, b) | RepIn(a, _, b) | RepOut(a, _, b):
            out = free_names(b, def_fn, cache) | {a}
        case Par(l, r):
            out = free_names(l, def_fn, cache) | free_names(r, def_fn, cache)
        case Res(c, b):
            out = free_names(b, def_fn, cache) - {c}
        case Cond(_, b):
            out = free_names(b, def_fn, cache)
        case Call(d, _):
            out = (def_fn or {}).get(d, frozenset())
        case _:
            hook = getattr(t, "free_names", None)
            if hook is None:
                raise TypeError(f"not a core process term: {t!r}")
            out = frozenset(hook())
    if cache is not None:
        cache[id(t)] = (t, out)
    return out


def def_free_names(defs) -> dict:
    """Least fixpoint of the free names of mutually recursive definitions."""
    defs = list(defs)
    fn = {d.name: frozenset() for d in defs}
    changed = True
    while changed:
        changed = False
        for d in defs:
            new = free_names(d.body, fn)
            if new != fn[d.name]:
                fn[d.name] = new
                changed = True
    return fn


def gc_term(t, def_fn: Mapping = None, cache: dict = None):
    """Drop inert structure: ``0 | P``, ``P | 0``, ``(c)0``, unused restrictions and dead guards.

    Only the active (unguarded) spine is rewritten.  Every step except the
    last is a structural congruence, and a guard that is closed and false
    makes its branch strongly bisimilar to 0, so behaviour is unchanged.
    """
    match t:
        case Par(l, r):
            l, r = gc_term(l, def_fn, cache), gc_term(r, def_fn, cache)
            if isinstance(l, Nil):
                return r
            if isinstance(r, Nil):
                return l
            return t if (l is t.left and r is t.right) else Par(l, r)
        case Res(c, b):
            b = gc_term(b, def_fn, cache)
            if isinstance(b, Nil) or c not in free_names(b, def_fn, cache):
                return b
            return Res(c, b) if b is not t.body else t
        case Cond(phi, _):
            from .presburger import decide

            # a closed false guard is as inert as 0
            if not formula_vars(phi) and not decide(phi):
                return NIL
    return t
