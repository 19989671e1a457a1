"""Value-passing process calculi VPC and VPC!: syntax, semantics, Gödel codes,
a universal engine, and bounded equivalence checking."""

from .equiv import bb_div_equiv, explore, stratified_equiv
from .godel import decode_program, decode_term, encode_program, encode_term
from .lts import direct_state
from .parser import parse_source, parse_term
from .syntax import Dialect, Name, TypeSig, VarId
from .universal import boot_interpreter, boot_universal

__all__ = [
    "Dialect", "Name", "TypeSig", "VarId",
    "parse_source", "parse_term",
    "encode_term", "decode_term", "encode_program", "decode_program",
    "direct_state", "boot_interpreter", "boot_universal",
    "explore", "bb_div_equiv", "stratified_equiv",
]
