"""Subatomic families over finite index intervals.

Three concrete kinds, all determined by their possibility sets:
  valueset  - possibilities are all binary strings on the interval, any
              nonempty subset is a subatom, norm log_b(|x|)/b
  hitting   - possibilities are the near-full subsets of the string space,
              norm log_b(nor0)/b where nor0 is the minimum hitting-set size
  counting  - same possibilities as hitting, but the norm is a function of
              the subatom's cardinality alone, built from the counting norms

Largeness requirements are certified at construction (or recorded as unmet
when explicitly waived for small test instances).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

from .counting import family_log_norm, overlap_parameters
from .exactnum import (DomainError, NormValue, Size, binomial, geq, logq,
                       nsub, rat, scale)

_MATERIALIZE_POSS_CAP = 200_000
_ENUM_SUBATOMS_CAP = 16


class EmptySubatom(DomainError):
    pass


def poss_sort_key(p):
    """Canonical total order on possibilities (ints or frozensets)."""
    if isinstance(p, int):
        return (0, p, ())
    return (1, len(p), tuple(sorted(p)))


def _ceil_log2(x: int) -> int:
    return (x - 1).bit_length()


@dataclass(frozen=True)
class Subatom:
    family: "SubatomicFamily"
    poss: frozenset

    def nor(self) -> NormValue:
        return self.family.nor_of(self.poss)

    def __len__(self):
        return len(self.poss)


@dataclass(frozen=True, eq=False)
class SubatomicFamily:
    kind: str                      # valueset | hitting | counting
    index_set: tuple[int, ...]
    b: int
    h_prime: Size
    poss_size: int
    poss: frozenset | None         # None when too large to materialize
    requirement_met: bool
    requirement_note: str = ""
    norm_divisor: Fraction = Fraction(1)   # > 1 only on rescaled views

    def nor_of(self, poss: frozenset | Iterable) -> NormValue:
        poss = frozenset(poss)
        if not poss:
            raise EmptySubatom("subatom with empty possibility set")
        if self.kind == "valueset":
            v = logq(self.b, len(poss), self.b)
        elif self.kind == "hitting":
            v = logq(self.b, self.nor_zero(poss), self.b)
        else:
            n = family_log_norm(len(self.index_set), self.b, len(poss))
            v = rat(Fraction(n, (1 << min(self.index_set)) * self.b ** 2))
        return scale(v, self.norm_divisor)

    def nor_zero(self, poss: frozenset) -> int:
        """Minimum hitting-set size for the possibility sets (hitting kind)."""
        if self.kind not in ("hitting", "counting"):
            raise DomainError("nor_zero only defined on hitting-style families")
        if not poss:
            raise EmptySubatom("nor_zero of empty subatom")
        seed = (1 << (len(self.index_set) - self.b)) + 1
        return _min_hitting_set(poss, seed)

    def make(self, poss: Iterable) -> Subatom:
        poss = frozenset(poss)
        if not poss:
            raise EmptySubatom("subatom needs at least one possibility")
        if self.poss is not None and not poss <= self.poss:
            raise DomainError("possibilities outside the family")
        return Subatom(self, poss)

    def full(self) -> Subatom:
        if self.poss is None:
            raise DomainError("family possibilities not materialized")
        return Subatom(self, self.poss)

    def all_subatoms(self) -> Iterator[frozenset]:
        if self.poss is None or len(self.poss) > _ENUM_SUBATOMS_CAP:
            raise DomainError("family too large to enumerate subatoms")
        elems = sorted(self.poss, key=poss_sort_key)
        for r in range(1, len(elems) + 1):
            for combo in itertools.combinations(elems, r):
                yield frozenset(combo)


@lru_cache(maxsize=None)
def _min_hitting_set_cached(sets: frozenset, upper: int) -> int:
    universe = frozenset().union(*sets)
    order = sorted(sets, key=lambda s: (len(s), sorted(s)))
    best = upper

    def walk(count: int, remaining: tuple) -> None:
        nonlocal best
        if not remaining:
            best = min(best, count)
            return
        if count + 1 >= best:
            return
        target = remaining[0]
        for p in sorted(target):
            walk(count + 1, tuple(s for s in remaining if p not in s))

    walk(0, tuple(order))
    assert best <= upper and all(len(s & universe) for s in sets)
    return best


def _min_hitting_set(sets: Iterable[frozenset], upper: int) -> int:
    return _min_hitting_set_cached(frozenset(sets), upper)


def _near_full_poss(n_bits: int, b: int) -> frozenset:
    universe = frozenset(range(1 << n_bits))
    hole = 1 << (n_bits - b)
    out = []
    for gap in itertools.combinations(sorted(universe), hole):
        out.append(universe - frozenset(gap))
    return frozenset(out)


def valueset_family(index_set: Iterable[int], b: int,
                    enforce_largeness: bool = True) -> SubatomicFamily:
    """All nonempty subsets of 2^I with norm log_b(|x|)/b."""
    idx = tuple(sorted(set(index_set)))
    if b < 2 or not idx:
        raise DomainError("valueset family needs b >= 2 and a nonempty interval")
    n = len(idx)
    need = b ** (b * b)
    met = (1 << n) > need
    if not met and enforce_largeness:
        raise DomainError(
            f"norm requirement needs 2^|I| > b^(b^2); minimal |I| is "
            f"{need.bit_length()} but got {n}")
    poss = frozenset(range(1 << n)) if n <= 20 else None
    return SubatomicFamily(
        kind="valueset", index_set=idx, b=b,
        h_prime=Size.two_to(max(idx) + 1),
        poss_size=1 << n, poss=poss, requirement_met=met,
        requirement_note="" if met else f"nor(POSS) <= b at |I|={n}")


def hitting_family(index_set: Iterable[int], b: int,
                   enforce_largeness: bool = True) -> SubatomicFamily:
    """Near-full subsets of 2^I with the minimum-hitting-set norm."""
    idx = tuple(sorted(set(index_set)))
    n = len(idx)
    if b < 2 or n < b:
        raise DomainError("hitting family needs 2 <= b <= |I|")
    need = b ** (b * b)
    met = (1 << (n - b)) + 1 > need
    if not met and enforce_largeness:
        raise DomainError(
            f"norm requirement needs nor0(POSS) > b^(b^2); minimal |I| is "
            f"{b + _ceil_log2(need)} but got {n}")
    size = binomial(1 << n, 1 << (n - b))
    poss = _near_full_poss(n, b) if size <= _MATERIALIZE_POSS_CAP else None
    return SubatomicFamily(
        kind="hitting", index_set=idx, b=b,
        h_prime=Size.of(max(idx) + 1),
        poss_size=size, poss=poss, requirement_met=met,
        requirement_note="" if met else f"nor0(POSS) too small at |I|={n}")


def counting_family(index_set: Iterable[int], b: int,
                    enforce_largeness: bool = True) -> SubatomicFamily:
    """Same possibilities as the hitting family; the norm only sees |C|."""
    idx = tuple(sorted(set(index_set)))
    n = len(idx)
    if b <= 2 or n <= b:
        raise DomainError("counting family needs b > 2 and |I| > b")
    if (1 << (n - b)) * (n + b.bit_length()) > (1 << 20):
        raise DomainError("interval too large to instantiate a counting family")
    size = binomial(1 << n, 1 << (n - b))
    lognor = family_log_norm(n, b, size)
    met = Fraction(lognor, (1 << min(idx)) * b * b) > b
    if not met and enforce_largeness:
        raise DomainError(
            f"norm requirement nor(POSS) > b fails at |I|={n} "
            f"(lognor={lognor}); a larger interval is required")
    m_count, _ = overlap_parameters(Fraction(1, b), size)
    h0 = Size.two_to(Size.of(size))
    h1 = Size.two_to(Size.of(m_count), mult=2 * b)
    poss = _near_full_poss(n, b) if size <= _MATERIALIZE_POSS_CAP else None
    return SubatomicFamily(
        kind="counting", index_set=idx, b=b,
        h_prime=h0 if h0.cmp(h1) >= 0 else h1,
        poss_size=size, poss=poss, requirement_met=met,
        requirement_note="" if met else f"nor(POSS) <= b at |I|={n}")


def nn_nor_zero(subatom: Subatom) -> int:
    if subatom.family.kind not in ("hitting", "counting"):
        raise DomainError("nor_zero needs a hitting-style family")
    return subatom.family.nor_zero(subatom.poss)


def remove_avoiding(subatom: Subatom, avoid: Iterable[int]) -> Subatom:
    """Keep only possibilities disjoint from `avoid`; certifies the norm drops.

    nor0 drops by at most |avoid| (a hitting set for the result plus `avoid`
    hits the original). When |avoid| is below half of b^nor, the norm itself
    drops by at most log_b(2).
    """
    fam = subatom.family
    if fam.kind != "hitting":
        raise DomainError("remove_avoiding is a hitting-family operation")
    avoid = frozenset(avoid)
    kept = frozenset(x for x in subatom.poss if not (x & avoid))
    if not kept:
        raise EmptySubatom("every possibility meets the avoided set")
    out = Subatom(fam, kept)
    n0_old, n0_new = fam.nor_zero(subatom.poss), fam.nor_zero(kept)
    assert n0_new >= n0_old - len(avoid)
    if (2 * len(avoid)) ** fam.b <= n0_old:
        # nor' >= nor - log_b(2), i.e. nor0' * 2^b >= nor0
        assert n0_new * (1 << fam.b) >= n0_old
    return out


@dataclass
class BignessVerdict:
    passed: bool
    exhaustive: bool
    members_checked: int
    colorings_checked: int
    counterexamples: list = field(default_factory=list)

    def __bool__(self):
        return self.passed


def check_bigness(family: SubatomicFamily, colors: int, mode: str = "exhaustive",
                  members: Iterable[frozenset] | None = None,
                  work_budget: int = 2_000_000, seed: int = 0) -> BignessVerdict:
    """Certify B-bigness (norm drop <= 1) or strong bigness (drop <= 1/B)
    by enumerating colorings; falls back to seeded sampling over the budget
    and flags the verdict as non-exhaustive.
    """
    if mode not in ("exhaustive", "strong"):
        raise DomainError("mode must be exhaustive or strong")
    if colors < 1:
        raise DomainError("need at least one color")
    drop = rat(Fraction(1, colors)) if mode == "strong" else rat(1)
    if members is None:
        members = family.all_subatoms()
    rng = random.Random(seed)
    verdict = BignessVerdict(passed=True, exhaustive=True,
                             members_checked=0, colorings_checked=0)
    for poss in members:
        poss = frozenset(poss)
        elems = sorted(poss, key=poss_sort_key)
        target = nsub(family.nor_of(poss), drop)
        total = colors ** len(elems)
        if total <= work_budget:
            colorings = itertools.product(range(colors), repeat=len(elems))
        else:
            verdict.exhaustive = False
            colorings = (tuple(rng.randrange(colors) for _ in elems)
                         for _ in range(work_budget // max(1, len(elems))))
        verdict.members_checked += 1
        for coloring in colorings:
            verdict.colorings_checked += 1
            ok = False
            for c in range(colors):
                cls = frozenset(e for e, col in zip(elems, coloring) if col == c)
                if not cls:
                    continue
                got = geq(family.nor_of(cls), target)
                if got is None:
                    raise RuntimeError("undecidable norm comparison in bigness check")
                if got:
                    ok = True
                    break
            if not ok:
                verdict.passed = False
                verdict.counterexamples.append(
                    {"poss": elems, "coloring": list(coloring)})
    return verdict


def rescale_norm(family: SubatomicFamily, divisor: int,
                 bigness_verified: bool = False) -> SubatomicFamily:
    """Divide the family norm by `divisor`. Given 2-bigness of the source,
    the result is 2^divisor-big (divisor nested halvings cost <= 1)."""
    if divisor < 1:
        raise DomainError("divisor must be >= 1")
    if not bigness_verified:
        raise DomainError("rescale requires the source 2-bigness to be verified")
    return SubatomicFamily(
        kind=family.kind, index_set=family.index_set, b=family.b,
        h_prime=family.h_prime, poss_size=family.poss_size, poss=family.poss,
        requirement_met=family.requirement_met,
        requirement_note=family.requirement_note,
        norm_divisor=family.norm_divisor * divisor)
