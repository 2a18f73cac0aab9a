"""Exact comparison machinery for norm values and oversized cardinalities.

Everything on a decision path is integer or Fraction arithmetic, no floats.
A comparison either produces a certificate (canonical form, integer
cross-powering) or refines dyadic intervals up to a precision budget and
then admits defeat with UNDECIDED. Refining never flips a decided verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

LESS = "lt"
EQUAL = "eq"
GREATER = "gt"
UNDECIDED = "undecided"

DEFAULT_BUDGET = 4096
MIN_BUDGET = 16

# integer cross-powering certificates allowed up to results of ~2M bits
_CROSSPOWER_BIT_CAP = 1 << 21
# towers materialize into plain ints below this bit length
EXACT_BITS_BUDGET = 1 << 20
# perfect-power extraction is skipped for very large arguments
_POWER_SCAN_BIT_CAP = 4096


class DomainError(ValueError):
    pass


class IncomparableSize(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient. k > n is a domain error, not 0."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"binomial({n},{k}) outside domain")
    return math.comb(n, k)


def iroot(n: int, k: int) -> int:
    """Largest r with r**k <= n."""
    if n < 0 or k < 1:
        raise DomainError("iroot outside domain")
    if n == 0 or k == 1:
        return n
    # Newton from above converges monotonically
    x = 1 << -((-n.bit_length()) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def perfect_power(n: int) -> tuple[int, int]:
    """n >= 2 written as r**e with e maximal, so r is not itself a power."""
    if n < 2:
        raise DomainError("perfect_power needs n >= 2")
    if n.bit_length() > _POWER_SCAN_BIT_CAP:
        return n, 1
    for e in range(n.bit_length() - 1, 1, -1):
        r = iroot(n, e)
        if r ** e == n:
            return r, e
    return n, 1


@lru_cache(maxsize=None)
def log2_int_bounds(n: int, t: int) -> tuple[Fraction, Fraction]:
    """Dyadic lo <= log2(n) <= hi with width about 2/2**t. Exact on powers of 2.

    Fixed-point squaring with directed rounding on both interval ends; the
    final bounds come from bit lengths alone, so soundness does not depend
    on any rounding-error estimate.
    """
    if n < 1:
        raise DomainError("log2 of nonpositive")
    if n & (n - 1) == 0:
        e = Fraction(n.bit_length() - 1)
        return e, e
    k = n.bit_length() - 1
    g = 2 * t + 8
    if g >= k:
        a = b = n << (g - k)
    else:
        sh = k - g
        a = n >> sh
        b = -((-n) >> sh)
    s = 0
    i = 0
    for _ in range(t):
        a = (a * a) >> g
        bb = b * b
        b = (bb >> g) + (1 if bb & ((1 << g) - 1) else 0)
        s <<= 1
        if a >> (g + 1):
            a >>= 1
            b = (b >> 1) + (b & 1)
            s += 1
        i += 1
        if (b >> (g + 2)) and not (a >> (g + 1)):
            break  # interval too wide to keep squaring; bail with what we have
    den = 1 << i
    lo = k + Fraction(s + a.bit_length() - 1 - g, den)
    hi = k + Fraction(s + b.bit_length() - g, den)
    return lo, hi


def log2_frac_bounds(x: Fraction, t: int) -> tuple[Fraction, Fraction]:
    ln, hn = log2_int_bounds(x.numerator, t)
    ld, hd = log2_int_bounds(x.denominator, t)
    return ln - hd, hn - ld


# ---------------------------------------------------------------------------
# Size descriptors: exact big naturals, or base**exp towers when the exact
# value would blow past the bit budget. exact=False marks a certified lower
# bound (used for cascade rows that are only bounded, never computed).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Size:
    n: int | None = None
    base: int = 0
    exp: "Size | None" = None
    mult: int = 1
    exact: bool = True

    @staticmethod
    def of(n: int, exact: bool = True) -> "Size":
        if n < 0:
            raise DomainError("Size is for naturals")
        return Size(n=n, exact=exact)

    @staticmethod
    def power(base: int, exp: "Size | int", mult: int = 1, exact: bool = True) -> "Size":
        if isinstance(exp, int):
            exp = Size.of(exp)
        if base < 2 or mult < 1:
            raise DomainError("tower needs base >= 2, mult >= 1")
        if not exp.exact:
            exact = False
        if exp.n is not None:
            est = exp.n * base.bit_length() + mult.bit_length()
            if est <= EXACT_BITS_BUDGET:
                return Size(n=mult * base ** exp.n, exact=exact)
        return Size(base=base, exp=exp, mult=mult, exact=exact)

    @staticmethod
    def two_to(exp: "Size | int", mult: int = 1, exact: bool = True) -> "Size":
        return Size.power(2, exp, mult, exact)

    @property
    def is_tower(self) -> bool:
        return self.n is None

    def bits_lower(self) -> "Size":
        """Lower bound on the bit length; exact for base-2 towers."""
        if self.n is not None:
            return Size.of(self.n.bit_length(), exact=self.exact)
        extra = self.mult.bit_length() - 1
        if self.base == 2:
            return self.exp.add(Size.of(extra + 1), force_exact=self.exact)
        # base >= 3: bit length >= exp * log2(base) >= exp
        return Size(n=self.exp.n, base=self.exp.base, exp=self.exp.exp,
                    mult=self.exp.mult, exact=False)

    def add(self, other: "Size | int", force_exact: bool | None = None) -> "Size":
        if isinstance(other, int):
            other = Size.of(other)
        if self.n is not None and other.n is not None:
            ex = self.exact and other.exact if force_exact is None else force_exact
            return Size.of(self.n + other.n, exact=ex)
        # at least one tower: keep the larger side as a lower bound
        big = self if self.cmp(other) >= 0 else other
        return Size(n=big.n, base=big.base, exp=big.exp, mult=big.mult, exact=False)

    def mul(self, other: "Size | int") -> "Size":
        if isinstance(other, int):
            other = Size.of(other)
        ex = self.exact and other.exact
        if self.n is not None and other.n is not None:
            return Size.of(self.n * other.n, exact=ex)
        a, b = (self, other) if self.n is None else (other, self)
        if b.n is not None:
            if b.n == 0:
                return Size.of(0, exact=ex)
            return Size.power(a.base, a.exp, a.mult * b.n, exact=ex)
        if a.base == b.base:
            return Size.power(a.base, a.exp.add(b.exp), a.mult * b.mult, exact=ex)
        raise IncomparableSize("mixed-base tower product")

    def cmp(self, other: "Size | int") -> int:
        """Compare nominal values (stored lower bounds compare as stated)."""
        if isinstance(other, int):
            other = Size.of(other)
        if self.n is not None and other.n is not None:
            return (self.n > other.n) - (self.n < other.n)
        if self.n is not None:
            return -other._cmp_int(self.n)
        if other.n is not None:
            return self._cmp_int(other.n)
        return self._cmp_tower(other)

    def _cmp_int(self, k: int) -> int:
        # self is a tower
        if self.exp.is_tower:
            return 1  # exponent already astronomically beyond any held int
        e = self.exp.n
        if e >= k.bit_length():
            return 1
        if self.base == 2:
            v = self.mult << e
        else:
            if e * self.base.bit_length() > 2 * _CROSSPOWER_BIT_CAP:
                return 1
            v = self.mult * self.base ** e
        return (v > k) - (v < k)

    def _cmp_tower(self, other: "Size") -> int:
        if self.base == other.base:
            c = self.exp.cmp(other.exp)
            if c == 0:
                return (self.mult > other.mult) - (self.mult < other.mult)
            if self.mult == other.mult:
                return c
            # exponent gap dwarfs any held multiplier for non-materialized towers
            return c
        # coordinatewise monotone separation
        ce = self.exp.cmp(other.exp)
        cb = (self.base > other.base) - (self.base < other.base)
        cm = (self.mult > other.mult) - (self.mult < other.mult)
        if ce >= 0 and cb >= 0 and cm >= 0:
            return 1 if (ce or cb or cm) else 0
        if ce <= 0 and cb <= 0 and cm <= 0:
            return -1
        # integer exponents: separate by dyadic bounds on log2 of the value
        if not self.exp.is_tower and not other.exp.is_tower:
            for t in (32, 128, 512):
                alo, ahi = self._log2_value_bounds(t)
                blo, bhi = other._log2_value_bounds(t)
                if ahi < blo:
                    return -1
                if bhi < alo:
                    return 1
        else:
            slo, shi = self._bits_range()
            olo, ohi = other._bits_range()
            if shi.cmp(olo) < 0:
                return -1
            if ohi.cmp(slo) < 0:
                return 1
        raise IncomparableSize("overlapping cross-base towers")

    def _log2_value_bounds(self, t: int) -> tuple[Fraction, Fraction]:
        # log2(mult * base^exp) bracketed in rationals; integer exponent only
        blo, bhi = log2_int_bounds(self.base, t)
        mlo, mhi = log2_int_bounds(self.mult, t)
        e = self.exp.n
        return e * blo + mlo, e * bhi + mhi

    def _bits_range(self) -> tuple["Size", "Size"]:
        if self.n is not None:
            b = Size.of(self.n.bit_length())
            return b, b
        lo = self.bits_lower()
        hibits = self.base.bit_length()  # log2(base) <= bit_length(base)
        hi = self.exp.mul(hibits).add(self.mult.bit_length())
        return lo, hi

    def __str__(self) -> str:
        tag = "" if self.exact else ">="
        if self.n is not None:
            if self.n.bit_length() <= 40:
                return f"{tag}{self.n}"
            return f"{tag}int[{self.n.bit_length()} bits]"
        m = f"{self.mult}*" if self.mult != 1 else ""
        return f"{tag}{m}{self.base}^({self.exp})"


# ---------------------------------------------------------------------------
# Norm values: nonnegative reals built from rationals and logarithms, with
# certified comparison.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormValue:
    kind: str                      # rat | logq | sub | min | max | log2c
    q: Fraction | None = None      # rat
    base: int = 0                  # logq
    arg: int = 0                   # logq
    div: Fraction | None = None    # logq, log2c
    kids: tuple = ()               # sub, min, max, log2c


def rat(p, q: int = 1) -> NormValue:
    v = Fraction(p, q) if q != 1 else (p if isinstance(p, Fraction) else Fraction(p))
    if v < 0:
        raise DomainError("norm values are nonnegative")
    return NormValue("rat", q=v)


ZERO = rat(0)


def logq(base: int, arg: int, div=1) -> NormValue:
    """log_base(arg) / div, clamped semantics need arg >= 1."""
    d = Fraction(div)
    if base < 2 or arg < 1 or d <= 0:
        raise DomainError("logq outside domain")
    return NormValue("logq", base=base, arg=arg, div=d)


def nsub(a: NormValue, b: NormValue) -> NormValue:
    return NormValue("sub", kids=(a, b))


def nmin(*xs: NormValue) -> NormValue:
    if not xs:
        raise DomainError("empty min")
    return xs[0] if len(xs) == 1 else NormValue("min", kids=tuple(xs))


def nmax(*xs: NormValue) -> NormValue:
    if not xs:
        raise DomainError("empty max")
    return xs[0] if len(xs) == 1 else NormValue("max", kids=tuple(xs))


def log2c(child: NormValue, div=1) -> NormValue:
    """log2(max(1, child)) / div."""
    d = Fraction(div)
    if d <= 0:
        raise DomainError("log2c divisor must be positive")
    return NormValue("log2c", div=d, kids=(child,))


def scale(v: NormValue, c) -> NormValue:
    """v / c for c > 0, distributed through the tree."""
    c = Fraction(c)
    if c <= 0:
        raise DomainError("scale divisor must be positive")
    if c == 1:
        return v
    if v.kind == "rat":
        return NormValue("rat", q=v.q / c)
    if v.kind == "logq":
        return NormValue("logq", base=v.base, arg=v.arg, div=v.div * c)
    if v.kind == "log2c":
        return NormValue("log2c", div=v.div * c, kids=v.kids)
    if v.kind == "sub":
        return NormValue("sub", kids=(scale(v.kids[0], c), scale(v.kids[1], c)))
    return NormValue(v.kind, kids=tuple(scale(k, c) for k in v.kids))


@lru_cache(maxsize=None)
def canon(v: NormValue) -> NormValue:
    if v.kind == "rat":
        return v
    if v.kind == "logq":
        return _canon_logq(v.base, v.arg, v.div)
    if v.kind == "log2c":
        child = canon(v.kids[0])
        if child.kind == "rat":
            q = child.q
            if q <= 1:
                return ZERO
            if q.denominator == 1:
                return _canon_logq(2, q.numerator, v.div)
            # log2(q) = log2(num) - log2(den), both >= 1 here so sub is exact
            return canon(nsub(logq(2, q.numerator, v.div),
                              logq(2, q.denominator, v.div)))
        return NormValue("log2c", div=v.div, kids=(child,))
    if v.kind == "sub":
        a, b = canon(v.kids[0]), canon(v.kids[1])
        if b == ZERO:
            return a
        if a.kind == "rat" and b.kind == "rat":
            return rat(max(Fraction(0), a.q - b.q))
        if (a.kind == "logq" and b.kind == "logq"
                and a.base == b.base and a.div == b.div):
            # log_b(m1) - log_b(m2) folds when m1/m2 is a power of the base
            fold = _log_ratio_fold(a.base, a.arg, b.arg, a.div)
            if fold is not None:
                return fold
        fold = _sub_crosspower_fold(a, b)
        if fold is not None:
            return fold
        c = _compare_certified(a, b)
        if c in (LESS, EQUAL):
            return ZERO
        return NormValue("sub", kids=(a, b))
    # min / max
    flat: list[NormValue] = []
    for k in v.kids:
        ck = canon(k)
        if ck.kind == v.kind:
            flat.extend(ck.kids)
        else:
            flat.append(ck)
    kept: list[NormValue] = []
    for x in flat:
        drop = False
        for j, y in enumerate(kept):
            c = _decide(x, y)
            if c is None:
                continue
            if v.kind == "min":
                if c in (GREATER, EQUAL):
                    drop = True
                    break
                kept[j] = None  # type: ignore[call-overload]
            else:
                if c in (LESS, EQUAL):
                    drop = True
                    break
                kept[j] = None  # type: ignore[call-overload]
        kept = [y for y in kept if y is not None]
        if not drop:
            kept.append(x)
    if len(kept) == 1:
        return kept[0]
    kept.sort(key=_sort_key)
    return NormValue(v.kind, kids=tuple(kept))


def _sort_key(v: NormValue):
    return (v.kind, str(v.q), v.base, v.arg, str(v.div), tuple(map(_sort_key, v.kids)))


def _canon_logq(base: int, arg: int, div: Fraction) -> NormValue:
    if arg == 1:
        return ZERO
    rb, eb = perfect_power(base)
    if eb > 1:
        base, div = rb, div * eb
    if arg == base:
        return rat(Fraction(1) / div)
    if arg.bit_length() <= _POWER_SCAN_BIT_CAP:
        ra, ea = perfect_power(arg)
        if ra == base:
            return rat(Fraction(ea) / div)
    return NormValue("logq", base=base, arg=arg, div=div)


def _log_ratio_fold(base: int, m1: int, m2: int, div: Fraction) -> NormValue | None:
    if m1 % m2 == 0:
        q, e = m1 // m2, 0
        while q % base == 0:
            q //= base
            e += 1
        if q == 1:
            return rat(Fraction(e) / div)
    elif m2 % m1 == 0:
        q = m2 // m1
        while q % base == 0:
            q //= base
        if q == 1:
            return ZERO  # difference is negative, clamp
    return None


def _as_log_pair(v: NormValue, base: int) -> tuple[Fraction, int] | None:
    """View v as coeff * log_base(arg): logq over the same base, or any
    rational r (= r * log_base(base))."""
    if v.kind == "logq" and v.base == base:
        return Fraction(1) / v.div, v.arg
    if v.kind == "rat":
        return v.q, base
    return None


def _sub_crosspower_fold(a: NormValue, b: NormValue) -> NormValue | None:
    """Fold a - b into a single log (or a clamped zero) via cross-powering
    when both sides are logs over one base and the power quotient is exact."""
    base = a.base if a.kind == "logq" else (b.base if b.kind == "logq" else 0)
    if base < 2:
        return None
    pa, pb = _as_log_pair(a, base), _as_log_pair(b, base)
    if pa is None or pb is None:
        return None
    (c1, m1), (c2, m2) = pa, pb
    den = c1.denominator * c2.denominator // math.gcd(
        c1.denominator, c2.denominator)
    u1, u2 = int(c1 * den), int(c2 * den)
    if u1 == 0:
        return ZERO
    g = math.gcd(u1, u2) if u2 else 1
    e1, e2 = u1 // g, u2 // g
    if (e1 * max(1, m1.bit_length()) > _CROSSPOWER_BIT_CAP
            or e2 * max(1, m2.bit_length()) > _CROSSPOWER_BIT_CAP):
        return None
    p1, p2 = m1 ** e1, m2 ** e2
    if p1 <= p2:
        return ZERO
    if p1 % p2 == 0:
        return _canon_logq(base, p1 // p2, Fraction(den, g))
    return None


def as_fraction(v: NormValue) -> Fraction | None:
    c = canon(v)
    return c.q if c.kind == "rat" else None


def _pow_cmp(b1: int, e1: int, b2: int, e2: int) -> int | None:
    """Sign of b1**e1 - b2**e2 when both stay under the bit cap."""
    if e1 * max(1, b1.bit_length()) > _CROSSPOWER_BIT_CAP:
        return None
    if e2 * max(1, b2.bit_length()) > _CROSSPOWER_BIT_CAP:
        return None
    x, y = b1 ** e1, b2 ** e2
    return (x > y) - (x < y)


def _compare_certified(a: NormValue, b: NormValue) -> str | None:
    """Exact verdicts from canonical forms and integer cross-powering."""
    if a == b:
        return EQUAL
    if a.kind == "rat" and b.kind == "rat":
        return LESS if a.q < b.q else (GREATER if a.q > b.q else EQUAL)
    if a.kind == "logq" and b.kind == "rat":
        # log_base(arg)/div vs p/q  <=>  arg**(q*dd) vs base**(p*dn)
        p, q = b.q.numerator, b.q.denominator
        dn, dd = a.div.numerator, a.div.denominator
        if p == 0:
            return GREATER  # canon already removed arg == 1
        s = _pow_cmp(a.arg, q * dd, a.base, p * dn)
        if s is not None:
            return LESS if s < 0 else (GREATER if s > 0 else EQUAL)
        return None
    if a.kind == "rat" and b.kind == "logq":
        c = _compare_certified(b, a)
        if c is None:
            return None
        return LESS if c == GREATER else (GREATER if c == LESS else EQUAL)
    if a.kind == "logq" and b.kind == "logq" and a.base == b.base:
        # log_b(m1)/d1 vs log_b(m2)/d2  <=>  m1**(d1d*d2n) vs m2**(d2d*d1n)
        d1n, d1d = a.div.numerator, a.div.denominator
        d2n, d2d = b.div.numerator, b.div.denominator
        s = _pow_cmp(a.arg, d1d * d2n, b.arg, d2d * d1n)
        if s is not None:
            return LESS if s < 0 else (GREATER if s > 0 else EQUAL)
    return None


@lru_cache(maxsize=None)
def _bounds(v: NormValue, t: int) -> tuple[Fraction, Fraction]:
    if v.kind == "rat":
        return v.q, v.q
    if v.kind == "logq":
        la, ha = log2_int_bounds(v.arg, t)
        lb, hb = log2_int_bounds(v.base, t)
        return la / (hb * v.div), ha / (lb * v.div)
    if v.kind == "sub":
        (la, ha), (lb, hb) = _bounds(v.kids[0], t), _bounds(v.kids[1], t)
        z = Fraction(0)
        return max(z, la - hb), max(z, ha - lb)
    if v.kind == "log2c":
        lc, hc = _bounds(v.kids[0], t)
        one = Fraction(1)
        lc, hc = max(one, lc), max(one, hc)
        lo = log2_frac_bounds(lc, t)[0]
        hi = log2_frac_bounds(hc, t)[1]
        return max(Fraction(0), lo) / v.div, max(Fraction(0), hi) / v.div
    los, his = zip(*(_bounds(k, t) for k in v.kids))
    if v.kind == "min":
        return min(los), min(his)
    return max(los), max(his)


def _decide(a: NormValue, b: NormValue, budget: int = 256) -> str | None:
    c = _compare_certified(a, b)
    if c is not None:
        return c
    t = MIN_BUDGET
    while t <= budget:
        la, ha = _bounds(a, t)
        lb, hb = _bounds(b, t)
        if ha < lb:
            return LESS
        if hb < la:
            return GREATER
        if la == ha and lb == hb:
            return EQUAL if la == lb else (LESS if la < lb else GREATER)
        t *= 4
    return None


def compare(a: NormValue, b: NormValue, budget: int = DEFAULT_BUDGET) -> str:
    """LESS/EQUAL/GREATER, or UNDECIDED once the precision budget runs out."""
    if budget < MIN_BUDGET:
        raise DomainError(f"precision budget must be >= {MIN_BUDGET}")
    a, b = canon(a), canon(b)
    c = _decide(a, b, budget)
    return c if c is not None else UNDECIDED


def leq(a: NormValue, b: NormValue, budget: int = DEFAULT_BUDGET) -> bool | None:
    """True/False when certified either way, None when undecided.

    Adds structural monotone rules on top of compare, so e.g. min(xs) <= b
    is certified as soon as one branch is.
    """
    a, b = canon(a), canon(b)
    c = _decide(a, b, budget)
    if c is not None:
        return c in (LESS, EQUAL)
    if b.kind == "min":
        sub = [leq(a, x, budget) for x in b.kids]
        if all(s is True for s in sub):
            return True
        if any(s is False for s in sub):
            return False
    if a.kind == "min":
        sub = [leq(x, b, budget) for x in a.kids]
        if any(s is True for s in sub):
            return True
        if all(s is False for s in sub):
            return False
    if a.kind == "max":
        sub = [leq(x, b, budget) for x in a.kids]
        if all(s is True for s in sub):
            return True
        if any(s is False for s in sub):
            return False
    if b.kind == "max":
        sub = [leq(a, x, budget) for x in b.kids]
        if any(s is True for s in sub):
            return True
        if all(s is False for s in sub):
            return False
    if a.kind == "sub" and leq(a.kids[0], b, budget) is True:
        return True
    if (a.kind == "log2c" and b.kind == "log2c" and a.div == b.div
            and leq(a.kids[0], b.kids[0], budget) is True):
        return True
    return None


def geq(a: NormValue, b: NormValue, budget: int = DEFAULT_BUDGET) -> bool | None:
    return leq(b, a, budget)


def is_zero(v: NormValue) -> bool:
    return canon(v) == ZERO


def approx(v: NormValue) -> float:
    """Float midpoint for display only, never for decisions."""
    lo, hi = _bounds(canon(v), 64)
    return float((lo + hi) / 2)


def bounds(v: NormValue, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Certified enclosure of the value at the given precision."""
    if bits < 4:
        raise DomainError("need at least 4 bits of precision")
    return _bounds(canon(v), bits)


def nv_str(v: NormValue) -> str:
    v = canon(v)
    if v.kind == "rat":
        return str(v.q)
    if v.kind == "logq":
        d = "" if v.div == 1 else f"/{v.div}"
        return f"log_{v.base}({v.arg}){d}"
    if v.kind == "sub":
        return f"({nv_str(v.kids[0])} -. {nv_str(v.kids[1])})"
    if v.kind == "log2c":
        d = "" if v.div == 1 else f"/{v.div}"
        return f"log2^+({nv_str(v.kids[0])}){d}"
    op = ", ".join(nv_str(k) for k in v.kids)
    return f"{v.kind}({op})"
