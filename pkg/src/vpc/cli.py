"""Command-line interface: ``vpc <subcommand> ...``.

Exit codes: 0 on success, 1 when a check fails or two processes are not
equivalent, 2 on usage, parse or codec errors.  Codes are printed and read
as decimal text.
"""

from __future__ import annotations

import argparse
import random
import re
import sys
from pathlib import Path

from .checker import check_program, check_term, parse_index, parse_program_index
from .equiv import TruncatedInput, bb_div_equiv, explore, stratified_equiv
from .godel import decode_program, decode_term, encode_program, encode_term
from .hovpc import ho_state, translate
from .lts import direct_state, is_tau
from .parser import parse_source
from .smn import encode_def, smn
from .syntax import Dialect, Name, Program, TypeSig, format_program, format_term
from .universal import boot_interpreter, boot_universal

_SIG_RE = re.compile(r"\s*i\s*=\s*(\d+)\s*;\s*g\s*=\s*(.*?)\s*$")
_NAME_RE = re.compile(r"n(\d+)$")


class UsageError(ValueError):
    pass


def parse_sig(text: str) -> TypeSig:
    """``"i=<n>;g=n1,n2,..."`` with names in canonical ``n<k>`` form."""
    m = _SIG_RE.match(text)
    if m is None:
        raise UsageError(f"bad signature {text!r}; expected 'i=<n>;g=<name>,...'")
    names = []
    for part in filter(None, (s.strip() for s in m.group(2).split(","))):
        nm = _NAME_RE.match(part)
        if nm is None:
            raise UsageError(f"signature names must look like n<k>, got {part!r}")
        names.append(Name(int(nm.group(1))))
    try:
        return TypeSig(int(m.group(1)), tuple(names))
    except ValueError as e:
        raise UsageError(str(e)) from None


def _dialect(text):
    return {"bang": Dialect.BANG, "p": Dialect.VPC, None: None}[text]


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load(path: str, higher_order: bool = False) -> Program:
    return parse_source(_read(path), higher_order)


def _subject(args, path):
    if getattr(args, "ho", False):
        return ho_state(_load(path, True).main)
    return direct_state(_load(path))


# ------------------------------------------------------------------ commands


def cmd_parse(args, out):
    p = _load(args.file, args.ho)
    out.write(format_program(p))
    return 0


def cmd_encode(args, out):
    p = _load(args.file)
    dialect = _dialect(args.dialect) or p.dialect
    sig = parse_sig(args.sig) if args.sig else None
    if dialect is Dialect.BANG:
        if p.defs:
            raise UsageError("a program with definitions has no VPC! term code")
        if sig is not None:
            v = check_term(p.main, sig, Dialect.BANG)
            if v is not None:
                print(f"type check failed: {v}", file=sys.stderr)
                return 1
        out.write(f"{encode_term(p.main, Dialect.BANG)}\n")
        return 0
    if p.dialect is Dialect.BANG:
        raise UsageError("replication is not part of the VPC dialect")
    if sig is not None:
        v = check_program(p, sig)
        if v is not None:
            print(f"type check failed: {v}", file=sys.stderr)
            return 1
    out.write(f"{encode_program(p)}\n")
    return 0


def cmd_decode(args, out):
    z = _code(args.code)
    if _dialect(args.dialect) is Dialect.BANG:
        out.write(f"main = {format_term(decode_term(z, Dialect.BANG))}\n")
    else:
        out.write(format_program(decode_program(z)))
    return 0


def cmd_normalize(args, out):
    z = _code(args.code)
    sig = parse_sig(args.sig)
    if _dialect(args.dialect) is Dialect.VPC:
        n = parse_program_index(z, sig)
    else:
        n = parse_index(z, sig, Dialect.BANG)
    out.write(f"{n}\n")
    if n == 0 and z != 0:
        print(f"index {z} is not of type [{sig}]", file=sys.stderr)
        return 1
    return 0


def _trace(state, args, out):
    if args.interactive:
        return _interactive(state, args, out)
    rng = random.Random(args.seed)
    for n in range(1, args.steps + 1):
        trans = state.transitions(args.vbound)
        if not trans:
            out.write(f"stop: no transitions after {n - 1} step(s)\n")
            return 0
        a, nxt = trans[rng.randrange(len(trans))]
        tag = ""
        if args.classify and is_tau(a):
            same = stratified_equiv(state, nxt, args.depth, args.vbound)
            tag = " [deterministic]" if same else " [nondet]"
        out.write(f"step {n}: {a}{tag}\n")
        state = nxt
    return 0


def _interactive(state, args, out):
    n = 0
    while True:
        out.write(f"state: {state}\n")
        trans = state.transitions(args.vbound)
        if not trans:
            out.write("no transitions\n")
            return 0
        for i, (a, t) in enumerate(trans):
            out.write(f"  [{i}] {a} -> {t}\n")
        out.write("choose> ")
        out.flush()
        line = sys.stdin.readline()
        if not line or line.strip() in ("q", "quit"):
            out.write("\n")
            return 0
        try:
            k = int(line)
            a, state = trans[k]
        except (ValueError, IndexError):
            out.write(f"no transition {line.strip()!r}\n")
            continue
        n += 1
        out.write(f"step {n}: {a}\n")


def cmd_run(args, out):
    return _trace(_subject(args, args.file), args, out)


def _engine(args):
    sig = parse_sig(args.sig)
    z = _code(args.code)
    if _dialect(args.dialect) is Dialect.BANG:
        return boot_interpreter(z, sig)
    return boot_universal(z, sig)


def cmd_universal(args, out):
    c = _engine(args)
    if args.mode == "graph":
        out.write(explore(c, args.vbound, args.cap, args.depth_cap).dump())
        return 0
    return _trace(c, args, out)


def cmd_bisim(args, out):
    g1 = explore(_subject(args, args.left), args.vbound, args.cap, args.depth_cap)
    g2 = explore(_subject(args, args.right), args.vbound, args.cap, args.depth_cap)
    try:
        v = bb_div_equiv(g1, g2)
    except TruncatedInput:
        out.write("inconclusive: a state space hit the exploration cap\n")
        return 1
    if v:
        out.write("equivalent\n")
        return 0
    out.write(f"not equivalent: {v.witness}\n")
    return 1


def cmd_strat_bisim(args, out):
    same = stratified_equiv(_subject(args, args.left), _subject(args, args.right),
                            args.depth, args.vbound)
    out.write(f"{'equivalent' if same else 'not equivalent'} up to depth {args.depth}\n")
    return 0 if same else 1


def cmd_smn(args, out):
    if args.source:
        if not (args.target and args.sig):
            raise UsageError("--source needs --target and --sig")
        z = encode_def(_load(args.source).defs, args.target, parse_sig(args.sig))
    elif args.code is not None:
        z = _code(args.code)
    else:
        raise UsageError("give a definition index or --source")
    if args.vals is not None or args.k1 is not None:
        vals = [int(v) for v in args.vals.split(",") if v.strip()] if args.vals else []
        z = smn(z, len(vals), args.k1 or 0, vals)
    out.write(f"{z}\n")
    return 0


def cmd_ho_translate(args, out):
    p = _load(args.file, True)
    out.write(format_term(translate(p.main)) + "\n")
    return 0


def cmd_graph_dump(args, out):
    if args.file is None:
        if args.code is None or args.sig is None:
            raise UsageError("give a source file, or --code with --sig")
        subject = _engine(args)
    else:
        subject = _subject(args, args.file)
    g = explore(subject, args.vbound, args.cap, args.depth_cap)
    out.write(g.dump())
    if not g.complete:
        print("warning: exploration was truncated", file=sys.stderr)
    return 0


def _code(text: str) -> int:
    try:
        z = int(text)
    except ValueError:
        raise UsageError(f"codes are decimal naturals, got {text!r}") from None
    if z < 0:
        raise UsageError("codes are natural numbers")
    return z


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vpc", description="VPC and VPC! process toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def explore_opts(p, depth=8):
        p.add_argument("--vbound", type=int, default=1, help="largest input value offered")
        p.add_argument("--cap", type=int, default=2000, help="state cap for exploration")
        p.add_argument("--depth-cap", type=int, default=10_000, help="depth cap for exploration")
        p.add_argument("--depth", type=int, default=depth, help="stratified game depth")

    def run_opts(p):
        explore_opts(p)
        p.add_argument("--steps", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--interactive", action="store_true")
        p.add_argument("--classify", action="store_true",
                       help="tag tau steps by bounded equivalence of pre and post state")

    p = sub.add_parser("parse", help="parse a source file and print it back")
    p.add_argument("file")
    p.add_argument("--ho", action="store_true", help="higher-order syntax")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("encode", help="print the Gödel code of a source file")
    p.add_argument("file")
    p.add_argument("--sig")
    p.add_argument("--dialect", choices=["bang", "p"])
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="print the source text of a code")
    p.add_argument("code")
    p.add_argument("--dialect", choices=["bang", "p"], default="p")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("normalize", help="normal index of a code (0 if ill typed)")
    p.add_argument("code")
    p.add_argument("--sig", required=True)
    p.add_argument("--dialect", choices=["bang", "p"], default="bang")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("run", help="random or interactive trace of a source file")
    p.add_argument("file")
    p.add_argument("--ho", action="store_true", help="higher-order syntax")
    run_opts(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("universal", help="run the universal engine on a code")
    p.add_argument("mode", nargs="?", choices=["run", "graph"], default="run")
    p.add_argument("--code", required=True)
    p.add_argument("--sig", required=True)
    p.add_argument("--dialect", choices=["bang", "p"], default="p")
    run_opts(p)
    p.set_defaults(func=cmd_universal)

    for name, func, help_ in (("bisim", cmd_bisim, "bounded branching bisimilarity"),
                              ("strat-bisim", cmd_strat_bisim, "depth-bounded equivalence game")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("left")
        p.add_argument("right")
        p.add_argument("--ho", action="store_true", help="higher-order syntax")
        explore_opts(p)
        p.set_defaults(func=func)

    p = sub.add_parser("smn", help="definition indices and partial application")
    p.add_argument("code", nargs="?")
    p.add_argument("--source", help="source file whose definitions form the system")
    p.add_argument("--target", help="definition name within --source")
    p.add_argument("--sig")
    p.add_argument("--vals", help="comma-separated values for the leading parameters")
    p.add_argument("--k1", type=int, help="number of remaining parameters")
    p.set_defaults(func=cmd_smn)

    p = sub.add_parser("ho-translate", help="translate a higher-order term to first order")
    p.add_argument("file")
    p.set_defaults(func=cmd_ho_translate)

    p = sub.add_parser("graph-dump", help="explore a process and dump its graph")
    p.add_argument("file", nargs="?")
    p.add_argument("--ho", action="store_true", help="higher-order syntax")
    p.add_argument("--code")
    p.add_argument("--sig")
    p.add_argument("--dialect", choices=["bang", "p"], default="p")
    explore_opts(p)
    p.set_defaults(func=cmd_graph_dump)
    return ap


def cli_main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args, out)
    except (OSError, TypeError, ValueError) as e:
        # parse, codec and usage errors are all ValueErrors
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main(sys.argv[1:]))
