from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creatures.counting import (
    binom_quotient, family_log_norm, log_norm, nor_divide, nor_intersect,
    overlap_parameters, overlap_witness, threshold, threshold_table,
)
from creatures.exactnum import DomainError, binomial

from oracles import lognor_fixpoint


def test_overlap_parameters_pinned():
    M, eps = overlap_parameters(Fraction(1, 2), 1)
    assert M == 5
    assert eps == Fraction(1, 128)


def test_overlap_parameters_level_zero():
    M, eps = overlap_parameters(Fraction(1, 2), 0)
    assert M == 1
    # one set of measure >= delta certainly has measure >= eps
    assert eps <= Fraction(1, 2)


def test_eps_nonincreasing_in_level():
    for num, den in ((1, 2), (1, 3), (2, 5)):
        d = Fraction(num, den)
        es = [overlap_parameters(d, ell)[1] for ell in range(9)]
        assert all(a >= b for a, b in zip(es, es[1:]))


def test_threshold_values():
    # b=2: F(0)=1, F(1)=5, F(2)=21
    assert threshold(2, 0) == 1
    assert threshold(2, 1) == 5
    assert threshold(2, 2) == 21
    assert threshold_table(2, 21) == [1, 5, 21]
    assert threshold_table(2, 20) == [1, 5]


def test_threshold_matches_overlap_parameters():
    for b in (2, 3, 5):
        f = 1
        for _ in range(4):
            m, _eps = overlap_parameters(Fraction(1, b), f)
            nxt = 2 * b * f + 1
            assert m == nxt
            f = nxt


def test_nor_intersect_pinned():
    assert nor_intersect(2, 4) == 0
    assert nor_intersect(2, 5) == 1
    assert nor_intersect(2, 20) == 1
    assert nor_intersect(2, 21) == 2
    assert nor_intersect(3, 1) == 0


def test_nor_divide_pinned():
    assert nor_divide(4, 3, 0) == 0
    assert nor_divide(4, 3, 56) == 2
    assert nor_divide(4, 3, 120) == 4
    assert binomial(2 ** 3, 2 ** 1) == 28   # the divisor behind the above


def test_nor_divide_preconditions():
    with pytest.raises(DomainError):
        nor_divide(4, 2, 10)          # b must exceed 2
    with pytest.raises(DomainError):
        nor_divide(3, 3, 10)          # interval must exceed b


def test_binom_quotient_pinned():
    assert binom_quotient(1, 2) == 2
    assert binom_quotient(2, 2) == Fraction(28, 6)


def test_binom_quotient_lower_bound_grid():
    for k in range(2, 9):
        for n in (1, 2, 3, 8, 16, 64):
            q = binom_quotient(n, k)
            assert q >= (2 - Fraction(1, k)) ** n


def test_log_norm_identity_prefix():
    ident = lambda x: x
    got = [log_norm(ident, ident, x) for x in range(5)]
    assert got == [0, 1, 2, 2, 3]


def test_log_norm_below_min():
    nor1 = lambda x: x.bit_length()
    nor2 = lambda x: x // 3
    for x in range(0, 200, 7):
        assert log_norm(nor1, nor2, x) <= min(nor1(x), nor2(x))


def test_log_norm_matches_fixpoint_oracle():
    cases = [
        (lambda x: x, lambda x: x),
        (lambda x: x.bit_length(), lambda x: x),
        (lambda x: x // 2, lambda x: x.bit_length()),
        (lambda x: x // 3 + (x > 0), lambda x: x // 5),
    ]
    for nor1, nor2 in cases:
        want = lognor_fixpoint(nor1, nor2, 512)
        for x in range(513):
            assert log_norm(nor1, nor2, x) == want[x], (x,)


def test_log_norm_monotone():
    nor1 = lambda x: x.bit_length()
    nor2 = lambda x: x // 4
    prev = 0
    for x in range(300):
        cur = log_norm(nor1, nor2, x)
        assert cur >= prev
        prev = cur


def test_log_norm_final_clause():
    # some component norm at y within 1 of x forces lognor within 1
    nor1 = lambda x: x.bit_length()
    nor2 = lambda x: x
    vals = [log_norm(nor1, nor2, x) for x in range(257)]
    for x in range(257):
        for y in range(257):
            if nor1(y) >= nor1(x) - 1 or nor2(y) >= nor2(x) - 1:
                assert vals[y] >= vals[x] - 1


def test_log_norm_rejects_non_monotone():
    dip = lambda x: 5 - x if x <= 5 else x
    with pytest.raises(DomainError):
        log_norm(dip, lambda x: x, 10)


def test_log_norm_two_bigness_sampled():
    ident = lambda x: x
    vals = [log_norm(ident, ident, x) for x in range(257)]
    for x in range(257):
        for a in range(x + 1):
            assert max(vals[a], vals[x - a]) >= vals[x] - 1


def test_family_log_norm_small_agrees_with_generic():
    i_size, b = 4, 3
    den = binomial(2 ** (i_size - 1), 2 ** (i_size - b))
    nor1 = lambda m: nor_intersect(b, m)
    nor2 = lambda m: m // den
    for m in range(0, 400, 13):
        assert family_log_norm(i_size, b, m) == log_norm(nor1, nor2, m)


def test_family_log_norm_pinned():
    assert family_log_norm(4, 3, 120) == 1
    # a value far beyond direct recursion over every integer below it
    big = binomial(512, 64)
    assert family_log_norm(9, 3, big) == 27


def test_overlap_witness_basic():
    # six sets over an 8-point uniform space, each of mass >= 1/2
    sets = [frozenset({0, 1, 2, 3}), frozenset({0, 1, 4, 5}),
            frozenset({2, 3, 4, 5}), frozenset({0, 2, 4, 6}),
            frozenset({1, 3, 5, 7}), frozenset({0, 1, 2, 4})]
    masses = {p: Fraction(1, 8) for p in range(8)}
    idx, mass = overlap_witness(sets, masses, 2)
    n = nor_intersect(2, len(sets))
    assert nor_intersect(2, len(idx)) >= n - 1
    common = frozenset.intersection(*(sets[i] for i in idx))
    assert sum(masses[p] for p in common) >= mass > 0
    _m, eps = overlap_parameters(Fraction(1, 2), len(sets))
    assert mass >= eps


@given(st.integers(2, 4), st.data())
@settings(max_examples=120, deadline=None)
def test_overlap_witness_random(b, data):
    omega = data.draw(st.integers(2, 12))
    masses = {p: Fraction(1, omega) for p in range(omega)}
    need = -(-omega // b)          # ceil(omega / b) points reach mass 1/b
    k = data.draw(st.integers(1, 24))
    sets = []
    for _ in range(k):
        pts = data.draw(st.sets(st.integers(0, omega - 1),
                                min_size=need, max_size=omega))
        sets.append(frozenset(pts))
    idx, mass = overlap_witness(sets, masses, b)
    n = nor_intersect(b, len(sets))
    assert nor_intersect(b, len(idx)) >= n - 1
    common = frozenset.intersection(*(sets[i] for i in idx))
    assert sum(masses[p] for p in common) >= mass
    _m, eps = overlap_parameters(Fraction(1, b), len(sets))
    assert mass >= eps
