"""Counting machinery: overlap thresholds, the two cardinality norms on
set systems, the combined logarithmic norm, and the intersection-witness
search used to certify norm drops.

All arithmetic is exact (int / Fraction).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Sequence

from .exactnum import DomainError, binomial


def overlap_parameters(delta, ell: int) -> tuple[int, Fraction]:
    """Family size M and mass eps: any M sets of measure >= delta contain
    ell+1 whose intersection has measure >= eps."""
    delta = Fraction(delta)
    if not (0 < delta <= 1) or ell < 0:
        raise DomainError("overlap_parameters outside domain")
    m = int(2 * ell / delta) + 1
    return m, delta / (2 * (1 << m))


def threshold_table(b: int, up_to: int) -> list[int]:
    """F(0)=1, F(n+1) = 2*b*F(n) + 1, listed while F(n) <= up_to."""
    if b < 2:
        raise DomainError("threshold_table needs b >= 2")
    out = [1]
    while out[-1] <= up_to:
        out.append(2 * b * out[-1] + 1)
    return out[:-1] if out[-1] > up_to else out


def threshold(b: int, n: int) -> int:
    f = 1
    for _ in range(n):
        f = 2 * b * f + 1
    return f


def nor_intersect(b: int, m: int) -> int:
    """Largest n whose threshold F(n) fits below m (0 when m < 1)."""
    if b < 2:
        raise DomainError("nor_intersect needs b >= 2")
    if m < 1:
        return 0
    n, f = 0, 1
    while True:
        f = 2 * b * f + 1
        if f > m:
            return n
        n += 1


def nor_divide(i_size: int, b: int, m: int) -> int:
    """floor(m / binomial(2^(i-1), 2^(i-b))) for an index interval of size i."""
    if b <= 2 or i_size <= b:
        raise DomainError("nor_divide needs b > 2 and interval size > b")
    if m < 0:
        raise DomainError("nor_divide needs m >= 0")
    return m // binomial(1 << (i_size - 1), 1 << (i_size - b))


def binom_quotient(n: int, k: int) -> Fraction:
    """binomial(2nk, n) / binomial(nk, n); grows at least like (2 - 1/k)^n."""
    if n < 1 or k < 2:
        raise DomainError("binom_quotient needs n >= 1, k >= 2")
    q = Fraction(binomial(2 * n * k, n), binomial(n * k, n))
    assert q >= (2 - Fraction(1, k)) ** n
    return q


def _check_monotone(nor: Callable[[int], int], hi: int) -> None:
    prev = nor(0)
    for y in range(1, hi + 1):
        cur = nor(y)
        if cur < prev:
            raise DomainError(f"norm oracle decreases at {y}")
        prev = cur


def log_norm(nor1: Callable[[int], int], nor2: Callable[[int], int], x: int,
             witness_min: Callable[[int, int], int] | None = None) -> int:
    """Combined norm: capped by both oracles, drops by at most 1 under
    halving and under passing to any y where either oracle dropped by <= 1.

    witness_min(i, target) must return the least y with nor_i(y) >= target;
    when omitted it is found by scanning, and both oracles are checked for
    monotonicity on [0, x] first (non-monotone input is a domain error).
    """
    if x < 0:
        raise DomainError("log_norm needs x >= 0")
    nors = (nor1, nor2)
    if witness_min is None:
        for nor in nors:
            _check_monotone(nor, x)

        def witness_min(i: int, target: int) -> int:
            if target <= 0:
                return 0
            lo, hi = 0, x
            while lo < hi:
                mid = (lo + hi) // 2
                if nors[i](mid) >= target:
                    hi = mid
                else:
                    lo = mid + 1
            return lo

    memo: dict[int, int] = {}

    def rec(z: int) -> int:
        got = memo.get(z)
        if got is not None:
            return got
        best = min(nor1(z), nor2(z))
        if z >= 1:
            best = min(best, 1 + rec(z // 2))
        ystar = min(witness_min(0, nor1(z) - 1), witness_min(1, nor2(z) - 1))
        if ystar < z:
            best = min(best, 1 + rec(ystar))
        memo[z] = best
        return best

    return rec(x)


def family_log_norm(i_size: int, b: int, m: int) -> int:
    """log_norm specialised to (nor_intersect, nor_divide) with exact
    threshold inverses, usable for astronomically large m."""
    den = binomial(1 << (i_size - 1), 1 << (i_size - b))

    def n1(y: int) -> int:
        return nor_intersect(b, y)

    def n2(y: int) -> int:
        return y // den

    def wmin(i: int, target: int) -> int:
        if target <= 0:
            return 0
        return threshold(b, target) if i == 0 else target * den

    return log_norm(n1, n2, m, witness_min=wmin)


def overlap_witness(sets: Sequence[frozenset], masses: dict, b: int
                    ) -> tuple[list[int], Fraction]:
    """Subfamily whose nor_intersect drops by at most 1 below the full
    family's, with common intersection of mass >= eps(1/b, |sets|).

    masses: point -> Fraction, summing to 1; every set needs mass >= 1/b.
    Returns (indices of the subfamily, mass of their intersection).
    """
    if b < 2 or not sets:
        raise DomainError("overlap_witness needs b >= 2 and a nonempty family")
    total = sum(masses.values())
    if total != 1:
        raise DomainError("masses must sum to 1")

    def mass(pts) -> Fraction:
        return sum((masses[p] for p in pts), Fraction(0))

    for a in sets:
        if mass(a) < Fraction(1, b):
            raise DomainError("every set needs mass >= 1/b")

    n = nor_intersect(b, len(sets))
    _, eps = overlap_parameters(Fraction(1, b), len(sets))
    if n == 0:
        got = mass(sets[0])
        assert got >= eps
        return [0], got

    need = threshold(b, n - 1) + 1  # points this deep in the family matter
    classes: dict[frozenset, Fraction] = {}
    for p, w in masses.items():
        sig = frozenset(i for i, a in enumerate(sets) if p in a)
        if len(sig) >= need:
            classes[sig] = classes.get(sig, Fraction(0)) + w
    if not classes:
        raise AssertionError("counting bound failed: no deep points")
    sig, got = max(classes.items(), key=lambda kv: (kv[1], sorted(kv[0])))
    picked = sorted(sig)
    assert nor_intersect(b, len(picked)) >= n - 1
    assert got >= eps
    inter = frozenset(masses) if not picked else frozenset.intersection(
        *(sets[i] for i in picked))
    assert mass(inter) >= got
    return picked, mass(inter)
