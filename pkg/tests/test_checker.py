"""Grammar checking, normalization and the index-for-0 convention."""

import random

from conftest import rand_closed_term

from vpc.checker import (
    ViolationKind, canonical_sig, check_program, check_program_code, check_term, grammar_check,
    normalize, parse_index, parse_program_index,
)
from vpc.godel import decode_term, encode_program, encode_term, pair2
from vpc.parser import parse_source
from vpc.syntax import Dialect, Name, TypeSig, analyze

P = Dialect.VPC
B = Dialect.BANG


def sig(i, *names):
    return TypeSig(i, tuple(Name(k) for k in names))


def test_grammar_check_examples():
    assert grammar_check(8, sig(0, 1), B) is None
    assert grammar_check(26, sig(0, 1), P).kind is ViolationKind.FreeVariable
    assert grammar_check(8, sig(0), B).kind is ViolationKind.GlobalBudget


def test_local_budget():
    z = encode_term(parse_source("main = (n3)(n4)('n3(0).0 | 'n4(0).0)").main, P)
    assert grammar_check(z, sig(2), P) is None
    assert grammar_check(z, sig(1), P).kind is ViolationKind.LocalBudget


def test_dialect_mismatch():
    rep = parse_source("main = !n1(x).0").main
    call = parse_source("def D() = 0\nmain = D()").main
    assert check_term(rep, sig(0, 1), B) is None
    assert check_term(rep, sig(0, 1), P).kind is ViolationKind.DialectMismatch
    assert check_term(call, sig(0), B).kind is ViolationKind.DialectMismatch


def test_normalize_examples():
    assert normalize(106, sig(0, 5), B) == 8
    assert normalize(274, sig(1, 1), P) == 22
    assert normalize(8, sig(0, 1), B) == 8


def test_parse_index_examples():
    assert parse_index(106, sig(0, 5), B) == 8
    assert parse_index(26, sig(0, 1), P) == 0
    assert parse_index(0, sig(0), P) == 0


def test_normalize_is_a_renaming():
    rng = random.Random(2)
    s = sig(4, 1, 2, 3, 4)
    for _ in range(200):
        t = rand_closed_term(rng, B, depth=4, names=4)
        z = encode_term(t, B)
        if grammar_check(z, s, B) is not None:
            continue
        u = decode_term(normalize(z, s, B), B)
        a, b = analyze(t), analyze(u)
        assert a.local_count == b.local_count
        assert len(a.global_names) == len(b.global_names)
        assert all(1 <= n.idx <= 4 for n in b.global_names)


def test_normalize_idempotent_under_canonical_sig():
    rng = random.Random(9)
    s = sig(4, 2, 4, 1, 3)
    for _ in range(200):
        z = encode_term(rand_closed_term(rng, B, depth=4, names=4), B)
        if grammar_check(z, s, B) is not None:
            continue
        once = normalize(z, s, B)
        assert normalize(once, canonical_sig(s), B) == once


def test_program_checks():
    p = parse_source("def D(x) = 'n1(x).D(x + 1)\nmain = D(0)")
    assert check_program(p, sig(0, 1)) is None
    assert check_program(p, sig(0)).kind is ViolationKind.GlobalBudget
    assert parse_program_index(encode_program(p), sig(0)) == 0
    assert parse_program_index(encode_program(p), sig(0, 1)) != 0


def test_stray_definition_component_is_malformed():
    z = pair2(0, pair2(3, 0))
    assert check_program_code(z, sig(0)).kind is ViolationKind.Malformed
    assert parse_program_index(z, sig(0)) == 0
