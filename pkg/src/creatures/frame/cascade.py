"""Level/sublevel parameter bookkeeping: the inductive growth cascade that
prescribes, per sublevel, the branching budget H, the possibility-count
bound, the color count B, and the bigness anchor b; plus small explicit
toy frames for exercising condition-level operations.

The exact cascade outgrows exact integers almost immediately: every value
from the second graded sublevel on is reported as a power-tower lower
bound.  Toy frames trade the growth requirements for small tables and
report honestly which requirements the tables meet.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from ..atoms import index_measure
from ..exactnum import EQUAL, DomainError, Size, binomial, compare, rat
from ..subatoms import SubatomicFamily

COLUMN_SLOT = -1


@dataclass(frozen=True)
class FamilyPlan:
    """One family type's slice of the index line at a graded sublevel."""
    kind: str
    start: int
    size: int
    size_exact: bool
    threshold: Size            # branching budget the type charges upward
    note: str = ""

    @property
    def interval(self) -> tuple[int, int]:
        return (self.start, self.start + self.size)


@dataclass(frozen=True)
class CascadeRow:
    level: int
    sub: int                                  # COLUMN_SLOT or the slot index
    h_below: Size
    maxposs_below: Size
    big: Size                                 # color count at this sublevel
    anchor: Size | None = None                # bigness anchor, graded rows
    interval: tuple[int, int] | None = None   # column index block, column rows
    sublevel_count: Size | None = None        # graded slots of the level
    norm_target: Size | None = None           # required full-subatom norm
    poss_bound: Size | None = None            # largest family size at the row
    families: tuple[FamilyPlan, ...] = ()
    exact: bool = True
    notes: tuple[str, ...] = ()

    @property
    def sublevel(self) -> tuple[int, int]:
        return (self.level, self.sub)


@dataclass(frozen=True)
class Requirement:
    name: str
    passed: bool | None          # None: not decidable at this size
    note: str = ""


@dataclass(frozen=True)
class CascadeTable:
    rows: tuple[CascadeRow, ...]
    checks: tuple[Requirement, ...]
    partial: bool
    h_seed_declared: int = 3
    h_seed_used: int = 4

    def row(self, level: int, sub: int) -> CascadeRow:
        for r in self.rows:
            if (r.level, r.sub) == (level, sub):
                return r
        raise DomainError(f"no row for sublevel ({level}, {sub})")


def _min_bits_strict(n: int) -> int:
    """Least k with 2^k > n."""
    return n.bit_length()


def _min_bits_geq(n: int) -> int:
    """Least k with 2^k >= n (n >= 1)."""
    return (n - 1).bit_length()


def _certified_le(a: Size, b: Size) -> bool | None:
    """True when the stated values certify actual(a) <= actual(b).

    A non-exact Size states a lower bound, so only an exact left side
    at or below the right side's stated value is conclusive."""
    if a.exact and a.cmp(b) <= 0:
        return True
    if a.exact and b.exact:
        return False
    return None


def _fold(results) -> bool | None:
    out: bool | None = True
    for r in results:
        if r is False:
            return False
        if r is None:
            out = None
    return out


def valueset_block_size(b: int, target: int) -> int:
    """Graded valueset block: big enough that the full subatom clears the
    target norm and the whole family clears the bigness threshold b."""
    return max(_min_bits_strict(b ** (b * b)),
               _min_bits_geq(b ** (b * target)))


def hitting_block_size(b: int, target: int) -> int:
    """Near-full hitting block: the 2^(|block|-b) covering capacity must
    clear both the bigness threshold and the target norm."""
    return b + max(_min_bits_geq(b ** (b * b)),
                   _min_bits_geq(b ** (b * target)))


def cascade_table(up_to: tuple[int, int] = (0, 1),
                  width_of: Callable[[int], int] | None = None) -> CascadeTable:
    """Build the growth table from the seed values up to the requested
    sublevel.  Rows stay exact through the first graded sublevel; past it
    every quantity is a power-tower lower bound, and the table goes
    partial once even the index-line positions stop being integers."""
    if width_of is None:
        width_of = lambda m: m
    if width_of(0) != 0 or any(width_of(m + 1) < width_of(m) for m in range(4)):
        raise DomainError("width profile must start at 0 and be nondecreasing")

    h_declared, h_used = 3, 4
    rows: list[CascadeRow] = []
    checks: list[Requirement] = []

    # Column slot of level 0.  The seed height 3 fails the strict growth
    # requirement 3 > 1 + 0 + 2, so it is raised by one and flagged.
    maxposs0 = Size.of(1)
    h0 = Size.of(h_used)
    big0 = Size.of(2)
    sk0 = (0, 1)                                   # one bit: the splitting
    j0 = Size.power(3, width_of(1))                # requirement is vacuous
    target0 = Size.of(1)                           # 2^(0 * maxposs)
    rows.append(CascadeRow(
        level=0, sub=COLUMN_SLOT, h_below=h0, maxposs_below=maxposs0,
        big=big0, interval=sk0, sublevel_count=j0, norm_target=target0,
        notes=(f"height seed {h_declared} raised to {h_used} for strictness",
               "column block kept at one bit: the splitting requirement "
               "is vacuous at level 0")))
    checks.append(Requirement(
        "height exceeds possibility count plus level plus two at level 0",
        h_used > 1 + 0 + 2,
        f"{h_used} > 1 + 0 + 2 after raising the seed from {h_declared}"))
    mu = index_measure(width_of(0), 3 ** width_of(1))
    checks.append(Requirement(
        "graded-slot count measures exactly the possibility power",
        compare(mu, rat(1)) == EQUAL,
        "log3(slots)/(width+1) == 2^(level*maxposs); exact because the "
        "width profile steps by one"))

    if up_to >= (0, 0):
        # First graded sublevel: everything still folds to exact integers.
        mp = Size.of(2 ** (1 * width_of(0)))
        h = Size.of(1 + h_used + max(range(*sk0)))
        big = Size.two_to(h.n * mp.n)
        anchor = big                               # no earlier graded slot
        b_int = big.n
        vs_size = valueset_block_size(b_int, target0.n)
        vs = FamilyPlan("valueset", sk0[1], vs_size, True,
                        Size.two_to(sk0[1] + vs_size),
                        "threshold is 2^(one past the block)")
        nf_size = hitting_block_size(b_int, target0.n)
        nf = FamilyPlan("hitting", vs.interval[1], nf_size, True,
                        Size.of(vs.interval[1] + nf_size),
                        "threshold is one past the block")
        cn_size = b_int + 1
        cn = FamilyPlan(
            "counting", nf.interval[1], cn_size, False,
            Size.two_to(binomial(2 ** cn_size, 2 ** (cn_size - b_int)),
                        exact=False),
            "smallest admissible block; size and threshold are lower bounds")
        # Largest family at the row: the near-full blocks hold at least
        # (2^size / 2^(size-b))^(2^(size-b)) = 2^(b * 2^(size-b)) members.
        m_low = Size.two_to(
            Size.two_to(b_int.bit_length() - 1 + nf_size - b_int),
            exact=False)
        rows.append(CascadeRow(
            level=0, sub=0, h_below=h, maxposs_below=mp, big=big,
            anchor=anchor, norm_target=target0, poss_bound=m_low,
            families=(vs, nf, cn), exact=True,
            notes=("anchor set to the color count: no earlier graded slot",)))
        checks.append(Requirement(
            "anchor equals the color count at the first graded slot",
            anchor.cmp(big) == 0, f"both {big}"))

    partial = up_to > (0, 1)
    if up_to >= (0, 1):
        # Second graded sublevel: the possibility bound swallows the
        # largest family and every later quantity is a tower lower bound.
        prev = rows[-1]
        mp1 = prev.maxposs_below.mul(Size.power(
            prev.poss_bound.base, prev.poss_bound.exp.mul(width_of(1)),
            exact=False))
        biggest = _max_size(f.threshold for f in prev.families)
        h1 = Size.of(1).add(prev.h_below).add(biggest)
        big1 = Size.power(2, h1.mul(mp1), exact=False)
        anchor1 = big1.mul(prev.anchor.add(1)).add(1)
        rows.append(CascadeRow(
            level=0, sub=1, h_below=h1, maxposs_below=mp1, big=big1,
            anchor=anchor1, norm_target=target0, exact=False,
            notes=("all quantities are power-tower lower bounds",
                   "family block positions exceed exact arithmetic; "
                   "the table goes partial past this row")))

    # Cross-row growth checks, certified only where the left side is exact.
    for name, pick in (("color counts nondecreasing", lambda r: r.big),
                       ("possibility bounds nondecreasing",
                        lambda r: r.maxposs_below)):
        ok = _fold(_certified_le(pick(a), pick(b))
                   for a, b in zip(rows, rows[1:]))
        checks.append(Requirement(
            name, ok, " -> ".join(str(pick(r)) for r in rows)))
    graded = [r for r in rows if r.sub != COLUMN_SLOT]
    ok = _fold(_certified_le(a.anchor.add(1), b.anchor)
               for a, b in zip(graded, graded[1:]))
    checks.append(Requirement(
        "anchors strictly increasing across graded rows", ok,
        " -> ".join(str(r.anchor) for r in graded)))
    for r in graded:
        name = (f"anchor covers twice the possibility bound at "
                f"({r.level},{r.sub})")
        if r.exact:
            checks.append(Requirement(
                name, r.anchor.cmp(r.maxposs_below.mul(2)) >= 0,
                f"{r.anchor} >= 2*{r.maxposs_below}"))
        else:
            checks.append(Requirement(
                name, None, "both sides are lower bounds; not exactly "
                "computable"))

    return CascadeTable(tuple(rows), tuple(checks), partial,
                        h_declared, h_used)


def _max_size(sizes) -> Size:
    best = None
    for s in sizes:
        if best is None or best.cmp(s) < 0:
            best = s
    return best


def format_table(table: CascadeTable) -> str:
    """Aligned text rendering plus per-check verdict lines."""
    out = ["sublevel  height     possibilities    colors       anchor"]
    for r in table.rows:
        slot = f"({r.level},{'c' if r.sub == COLUMN_SLOT else r.sub})"
        anchor = str(r.anchor) if r.anchor is not None else "-"
        out.append(f"{slot:<9} {str(r.h_below):<10} "
                   f"{str(r.maxposs_below):<16} {str(r.big):<12} {anchor}")
        if r.interval is not None:
            out.append(f"          column block [{r.interval[0]}, "
                       f"{r.interval[1]}), {r.sublevel_count} graded slots")
        for f in r.families:
            excl = "" if f.size_exact else ">="
            out.append(f"          block {f.kind}: [{f.start}, {f.start}+"
                       f"{excl}{f.size}) threshold {f.threshold}")
        for n in r.notes:
            out.append(f"          note: {n}")
    if table.partial:
        out.append("table is partial: later rows exceed the descriptor "
                   "arithmetic")
    for c in table.checks:
        mark = {True: "pass", False: "FAIL", None: "open"}[c.passed]
        out.append(f"[{mark}] {c.name}: {c.note}")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Toy frames
# ---------------------------------------------------------------------------

class ToyFrame:
    """Explicit small parameter tables over levels 0..height-1.

    Column index blocks are consecutive from position 0, so condition
    trunks and possibility strings line up with plain bit positions.
    Growth requirements are not imposed; requirements() reports per
    requirement whether the tables happen to meet it.
    """

    def __init__(self, *, widths: Sequence[int], poss_caps: Sequence[int],
                 colors: Sequence[int], bits: Sequence[int],
                 sublevel_counts: Sequence[int],
                 families: Mapping[str, SubatomicFamily] | Callable):
        n = len(widths)
        if not (len(poss_caps) == len(colors) == len(bits)
                == len(sublevel_counts) == n):
            raise DomainError("parameter tables must share one height")
        if n == 0:
            raise DomainError("a toy frame needs at least one level")
        self.widths = tuple(widths)
        self.poss_caps = tuple(poss_caps)
        self.colors_ = tuple(colors)
        self.bits = tuple(bits)
        self.sublevel_counts = tuple(sublevel_counts)
        self.families = families
        starts = [0]
        for w in self.bits:
            starts.append(starts[-1] + w)
        self._starts = tuple(starts)
        for name, table, least in (("widths", self.widths, 0),
                                   ("possibility caps", self.poss_caps, 1),
                                   ("colors", self.colors_, 2),
                                   ("column bits", self.bits, 1),
                                   ("sublevel counts", self.sublevel_counts, 1)):
            if any(v < least for v in table):
                raise DomainError(f"{name} must be >= {least} everywhere")

    @classmethod
    def uniform(cls, height: int, *, width: int = 1, poss_cap: int = 1,
                colors: int = 2, bits: int = 2, sublevels=9,
                families: Mapping[str, SubatomicFamily] | Callable = None):
        subs = ([sublevels(h) for h in range(height)] if callable(sublevels)
                else [sublevels] * height)
        return cls(widths=[min(width, m) for m in range(height)],
                   poss_caps=[poss_cap] * height, colors=[colors] * height,
                   bits=[bits] * height, sublevel_counts=subs,
                   families=families)

    @property
    def height(self) -> int:
        return len(self.widths)

    def _check(self, m: int) -> int:
        if not 0 <= m < self.height:
            raise DomainError(f"level {m} outside the toy frame tables")
        return m

    def maxwidth(self, m: int) -> int:
        return self.widths[self._check(m)]

    def maxposs_below(self, m: int) -> int:
        return self.poss_caps[self._check(m)]

    def colors(self, m: int) -> int:
        return self.colors_[self._check(m)]

    def sacks_interval(self, h: int) -> tuple[int, ...]:
        self._check(h)
        return tuple(range(self._starts[h], self._starts[h + 1]))

    def sublevels(self, h: int) -> int:
        return self.sublevel_counts[self._check(h)]

    def family(self, x, h, j) -> SubatomicFamily:
        if callable(self.families):
            return self.families(x, h, j)
        return self.families[x.kind]

    def _family_pool(self):
        if callable(self.families):
            return ()
        return tuple(sorted(self.families.items()))

    def requirements(self) -> tuple[Requirement, ...]:
        out = [Requirement(
            "column blocks consecutive from position 0", True,
            f"ends at {self._starts[-1]}")]
        for name, table in (("colors", self.colors_),
                            ("possibility caps", self.poss_caps),
                            ("widths", self.widths)):
            mono = all(a <= b for a, b in zip(table, table[1:]))
            out.append(Requirement(f"{name} nondecreasing", mono, str(table)))
        out.append(Requirement(
            "widths stay under their level",
            all(w <= m for m, w in enumerate(self.widths)),
            str(self.widths)))
        for kind, fam in self._family_pool():
            out.append(Requirement(
                f"{kind} family meets its size requirement",
                fam.requirement_met, fam.requirement_note))
            anchor_ok = all(fam.b >= 2 * cap for cap in self.poss_caps)
            out.append(Requirement(
                f"{kind} anchor covers twice every possibility cap",
                anchor_ok, f"b={fam.b}, caps={self.poss_caps}"))
        return tuple(out)
