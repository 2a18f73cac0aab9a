import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creatures.exactnum import (
    DomainError, EQUAL, GREATER, LESS, UNDECIDED, IncomparableSize, Size,
    binomial, canon, compare, geq, iroot, is_zero, leq, log2_frac_bounds,
    log2_int_bounds, log2c, logq, nmax, nmin, nsub, nv_str, perfect_power,
    rat, scale,
)


def test_binomial_values():
    assert binomial(8, 2) == 28
    assert binomial(16, 2) == 120
    assert binomial(7, 0) == 1
    assert binomial(0, 0) == 1


def test_binomial_rejects_k_above_n():
    with pytest.raises(DomainError):
        binomial(3, 4)


def test_binomial_pascal_exhaustive():
    # Pascal recurrence, all n <= 64
    for n in range(1, 65):
        for k in range(1, n + 1):
            assert binomial(n, k) == binomial(n - 1, k - 1) + (
                binomial(n - 1, k) if k <= n - 1 else 0)


def test_iroot():
    assert iroot(26, 3) == 2
    assert iroot(27, 3) == 3
    assert iroot(1, 5) == 1
    for n in (2, 10, 999, 10**12 + 7):
        for k in (1, 2, 3, 7):
            r = iroot(n, k)
            assert r**k <= n < (r + 1) ** k


def test_perfect_power():
    assert perfect_power(64) == (2, 6)
    assert perfect_power(36) == (6, 2)
    assert perfect_power(7) == (7, 1)
    assert perfect_power(3**5) == (3, 5)


# --- compare: pinned cases -------------------------------------------------

def test_compare_perfect_power_equal():
    # log_3(9)/2 == 1
    assert compare(logq(3, 9, 2), rat(1)) == EQUAL


def test_compare_cross_powering():
    # log_2(9)/2 vs 3/2 reduces to 9 vs 8
    assert compare(logq(2, 9, 2), rat(3, 2)) == GREATER


def test_compare_log_of_one():
    assert compare(rat(0), logq(2, 1, 5)) == EQUAL
    assert is_zero(logq(2, 1, 5))


def test_compare_equal_across_bases():
    # log_4(9) == log_2(3)
    assert compare(logq(2, 3, 1), logq(4, 9, 1)) == EQUAL


@given(st.integers(2, 9), st.integers(1, 400), st.integers(0, 60),
       st.integers(1, 12))
@settings(max_examples=300, deadline=None)
def test_compare_agrees_with_integer_test(b, m, p, q):
    got = compare(logq(b, m, 1), rat(p, q))
    lhs, rhs = m**q, b**p
    want = EQUAL if lhs == rhs else (LESS if lhs < rhs else GREATER)
    assert got == want


def _pool():
    vals = [rat(0), rat(1), rat(3, 2), rat(1, 3),
            logq(2, 3, 1), logq(2, 9, 2), logq(3, 9, 2), logq(3, 5, 2),
            logq(5, 126, 3), log2c(rat(3, 2)), log2c(logq(3, 27, 1), 2),
            nsub(logq(2, 9, 1), rat(3)), nmin(rat(1, 3), logq(3, 9, 2))]
    vals.append(nmax(logq(2, 3, 1), rat(1)))
    return vals


def test_refinement_never_flips():
    pool = _pool()
    for a in pool:
        for b in pool:
            low = compare(a, b, budget=16)
            high = compare(a, b, budget=1 << 14)
            if low != UNDECIDED:
                assert low == high


def test_budget_floor():
    with pytest.raises(DomainError):
        compare(rat(1), rat(2), budget=4)


# --- canonical forms -------------------------------------------------------

def test_sub_folds_to_rational():
    # log_2(8) - log_2(2) = 2
    v = nsub(logq(2, 8, 1), logq(2, 2, 1))
    assert compare(v, rat(2)) == EQUAL


def test_sub_clamps_at_zero():
    v = nsub(rat(1), rat(5))
    assert is_zero(v)


def test_min_collapses_when_ordered():
    v = nmin(rat(1, 3), logq(3, 9, 2))     # log_3(9)/2 = 1 > 1/3
    assert compare(v, rat(1, 3)) == EQUAL


def test_log2_clamp():
    assert is_zero(log2c(rat(1)))
    assert is_zero(log2c(rat(2, 3)))
    assert compare(log2c(rat(2)), rat(1)) == EQUAL
    # log2(log_3(27)) / 2 = log2(3)/2... log_3(27)=3
    v = log2c(logq(3, 27, 1), 2)
    assert compare(v, logq(2, 3, 2)) == EQUAL


def test_scale_distributes():
    # scale divides: min(4, log2 16) / 2
    v = scale(nmin(rat(4), logq(2, 16, 1)), 2)
    assert compare(v, rat(2)) == EQUAL


def test_leq_structural():
    big = nmin(rat(5), logq(2, 1 << 20, 1))
    assert leq(rat(3), big) is True
    assert geq(big, rat(3)) is True
    assert leq(big, rat(3)) is False


# --- dyadic log bounds ------------------------------------------------------

def test_log2_bounds_exact_on_powers():
    for k in range(0, 40, 3):
        lo, hi = log2_int_bounds(1 << k, 16)
        assert lo == hi == k


@given(st.integers(2, 10**9))
@settings(max_examples=200, deadline=None)
def test_log2_bounds_bracket(n):
    lo, hi = log2_int_bounds(n, 24)
    true = math.log2(n)
    assert float(lo) <= true <= float(hi) + 1e-12
    assert hi - lo <= Fraction(1, 1 << 20)


def test_log2_frac_bounds():
    lo, hi = log2_frac_bounds(Fraction(3, 2), 20)
    assert float(lo) <= math.log2(1.5) <= float(hi)


# --- size descriptors -------------------------------------------------------

def test_size_exact_round_trip():
    s = Size.two_to(Size.of(5))
    assert not s.is_tower
    assert s.n == 32


def test_size_tower_compare():
    huge = Size.power(2, Size.two_to(Size.of(32)))   # 2^(2^32)
    assert huge.is_tower
    assert huge.cmp(10**100) > 0
    bigger = Size.power(2, Size.two_to(Size.of(33)))
    assert huge.cmp(bigger) < 0
    assert huge.cmp(huge) == 0


def test_size_materializes_within_budget():
    s = Size.power(2, Size.of(4096))
    assert not s.is_tower
    assert s.n == 1 << 4096


def test_size_mul_and_add():
    a = Size.of(12).mul(3)
    assert a.n == 36
    t = Size.power(3, Size.two_to(Size.of(40)), mult=2)
    assert t.mul(5).mult == 10
    assert "3^" in str(t)


def test_size_incomparable_raises_or_decides():
    a = Size.power(3, Size.two_to(Size.of(64)))
    b = Size.power(2, Size.two_to(Size.of(64)))
    try:
        assert a.cmp(b) > 0    # 3^x > 2^x, decidable from bit bounds
    except IncomparableSize:
        pytest.fail("same-exponent cross-base should separate")


def test_nv_str_smoke():
    assert nv_str(rat(3, 2))
    assert nv_str(nmin(rat(1), logq(2, 3, 1)))
