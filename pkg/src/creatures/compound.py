"""Creatures spanning a block of levels.

A compound creature occupies a rectangle: a finite set of typed indices
(its support) across levels m_dn <= h < m_up. Column-kind indices carry
one branching column over the stacked level intervals; every other kind
carries a grid row of subatoms, one per sublevel. Each level also has a
dyadic halving parameter d(h) that later lets conditions trade norm for
decisions.

The norm is the least of: the support width, the column splitting norms,
one max-over-levels atom norm per graded row, and a per-level halving-
damped log of the worst valueset atom.

Frames are passed duck-typed; anything with maxwidth/maxposs_below/
colors/sacks_interval/sublevels/family works (see frame module).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .atoms import Atom, atom_norm, split_index_sets
from .exactnum import (EQUAL, GREATER, BudgetExceeded, DomainError, NormValue,
                       UNDECIDED, as_fraction, bounds, compare, leq, log2c,
                       nmax, nmin, nsub, rat)
from .sacks import column_cube, column_product, nor_sacks
from .subatoms import Subatom, poss_sort_key

COLUMN = "column"
VALUESET = "valueset"
HITTING = "hitting"
COUNTING = "counting"
KINDS = (COLUMN, VALUESET, HITTING, COUNTING)

# valueset rows bound the per-level norm from below at every level;
# the other graded rows only need one good level each
LIMINF_KINDS = (VALUESET,)


@dataclass(frozen=True, order=True)
class Index:
    kind: str
    name: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown index kind {self.kind!r}")


@dataclass
class CompoundCreature:
    m_dn: int
    m_up: int
    supp: tuple
    columns: dict          # Index -> Column, for column-kind indices
    grid: dict             # (Index, level, sublevel) -> Subatom
    halving: tuple         # Fraction per level in [m_dn, m_up)

    def __post_init__(self):
        if not 0 <= self.m_dn < self.m_up:
            raise DomainError("need 0 <= m_dn < m_up")
        self.supp = tuple(sorted(set(self.supp)))
        if not self.supp:
            raise DomainError("support must be nonempty")
        self.halving = tuple(Fraction(d) for d in self.halving)
        if len(self.halving) != self.m_up - self.m_dn:
            raise DomainError("need one halving parameter per level")
        for d in self.halving:
            if d < 0:
                raise DomainError("halving parameters must be >= 0")
            if d.denominator & (d.denominator - 1):
                raise DomainError("halving parameters must be dyadic")

    def levels(self):
        return range(self.m_dn, self.m_up)

    def halving_at(self, level: int) -> Fraction:
        return self.halving[level - self.m_dn]

    def column_indices(self) -> tuple:
        return tuple(x for x in self.supp if x.kind == COLUMN)

    def row_indices(self) -> tuple:
        return tuple(x for x in self.supp if x.kind != COLUMN)


def stacked_interval(frame, m_dn: int, m_up: int) -> tuple:
    out = []
    for h in range(m_dn, m_up):
        step = tuple(frame.sacks_interval(h))
        if out and min(step) != out[-1] + 1:
            raise DomainError("column intervals of the frame do not stack")
        out.extend(step)
    return tuple(out)


def validate_creature(c: CompoundCreature, frame) -> None:
    """Shape against the frame, plus modesty: at most one non-singleton
    subatom at each sublevel of each level."""
    rows = c.row_indices()
    if set(c.columns) != set(c.column_indices()):
        raise DomainError("columns must cover exactly the column-kind indices")
    want = stacked_interval(frame, c.m_dn, c.m_up)
    for x, col in c.columns.items():
        if tuple(col.interval) != want:
            raise DomainError(f"column at {x} spans {col.interval}, frame wants {want}")
    expected = {(x, h, j)
                for x in rows
                for h in c.levels()
                for j in range(frame.sublevels(h))}
    if set(c.grid) != expected:
        raise DomainError("grid must cover exactly support x levels x sublevels")
    for h in c.levels():
        for j in range(frame.sublevels(h)):
            wide = [x for x in rows if len(c.grid[(x, h, j)].poss) > 1]
            if len(wide) > 1:
                raise DomainError(
                    f"sublevel ({h},{j}) has {len(wide)} non-singleton subatoms")


def level_atom(c: CompoundCreature, frame, index: Index, level: int) -> Atom:
    comps = tuple(c.grid[(index, level, j)]
                  for j in range(frame.sublevels(level)))
    return Atom(level, comps)


@dataclass
class CompoundNorm:
    width: NormValue
    per_column: dict       # Index -> int
    per_row: dict          # Index -> NormValue, max atom norm over levels
    per_level: dict        # level -> NormValue, halving-damped valueset bound
    total: NormValue


def compound_norm(c: CompoundCreature, frame, budget: int = 1 << 12) -> CompoundNorm:
    width_frac = Fraction(frame.maxwidth(c.m_dn), len(c.supp))
    assert width_frac <= c.m_dn, "frame maxwidth exceeds the base level"
    width = rat(width_frac)

    colors = frame.colors(c.m_dn)
    per_column = {x: nor_sacks(c.columns[x], colors, c.m_dn,
                               width_fn=frame.maxwidth)
                  for x in c.column_indices()}

    atom_vals = {}
    for x in c.row_indices():
        for h in c.levels():
            atom_vals[(x, h)] = atom_norm(level_atom(c, frame, x, h), budget)[0]

    per_row = {x: nmax(*[atom_vals[(x, h)] for h in c.levels()])
               for x in c.row_indices()}

    per_level = {}
    li = [x for x in c.row_indices() if x.kind in LIMINF_KINDS]
    if li:
        mp = frame.maxposs_below(c.m_dn)
        for h in c.levels():
            floor = nmin(*[atom_vals[(x, h)] for x in li])
            per_level[h] = log2c(nsub(floor, rat(c.halving_at(h))), mp)

    total = nmin(width,
                 *[rat(v) for v in per_column.values()],
                 *per_row.values(),
                 *per_level.values())
    return CompoundNorm(width, per_column, per_row, per_level, total)


def purely_stronger(d: CompoundCreature, c: CompoundCreature) -> bool:
    """Same shape and halving, columns and subatoms componentwise shrunk."""
    if (d.m_dn, d.m_up, d.supp, d.halving) != (c.m_dn, c.m_up, c.supp, c.halving):
        return False
    if set(d.columns) != set(c.columns) or set(d.grid) != set(c.grid):
        return False
    for x, col in d.columns.items():
        old = c.columns[x]
        if tuple(col.interval) != tuple(old.interval):
            return False
        if not col.branches <= old.branches:
            return False
    for key, sub in d.grid.items():
        if not sub.poss <= c.grid[key].poss:
            return False
    return True


def _restrict_parts(c: CompoundCreature, u) -> CompoundCreature:
    u = tuple(sorted(set(u)))
    columns = {x: c.columns[x] for x in u if x.kind == COLUMN}
    grid = {key: sub for key, sub in c.grid.items() if key[0] in set(u)}
    return CompoundCreature(c.m_dn, c.m_up, u, columns, grid, c.halving)


def _check_type_coverage(u, what: str) -> None:
    kinds = {x.kind for x in u}
    if COLUMN not in kinds:
        raise DomainError(f"{what} needs a column index")
    if VALUESET not in kinds:
        raise DomainError(f"{what} needs a valueset index")
    if not kinds & {HITTING, COUNTING}:
        raise DomainError(f"{what} needs a hitting or counting index")


def restrict(c: CompoundCreature, u, frame, budget: int = 1 << 12) -> CompoundCreature:
    """Drop indices outside u. Norm never decreases (each surviving subnorm
    is unchanged and the width can only grow)."""
    u = tuple(sorted(set(u)))
    if not set(u) <= set(c.supp):
        raise DomainError("restriction outside the support")
    _check_type_coverage(u, "restriction")
    r = _restrict_parts(c, u)
    validate_creature(r, frame)
    before = compound_norm(c, frame, budget).total
    after = compound_norm(r, frame, budget).total
    assert leq(before, after, budget) is not False
    return r


def glue(creatures, frame, budget: int = 1 << 12) -> CompoundCreature:
    """Stack creatures vertically. Needs m_up(c_i) == m_dn(c_{i+1}) and
    supports growing upward; the result lives on the first support."""
    cs = list(creatures)
    if not cs:
        raise DomainError("nothing to glue")
    for a, b in zip(cs, cs[1:]):
        if a.m_up != b.m_dn:
            raise DomainError(f"stacking gap: {a.m_up} != {b.m_dn}")
        if not set(a.supp) <= set(b.supp):
            raise DomainError("supports must grow upward")
    if len(cs) == 1:
        validate_creature(cs[0], frame)
        return cs[0]

    supp = cs[0].supp
    columns = {}
    for x in cs[0].column_indices():
        columns[x] = reduce(column_product, [ci.columns[x] for ci in cs])
    grid = {}
    for ci in cs:
        for x in supp:
            if x.kind == COLUMN:
                continue
            for h in ci.levels():
                for j in range(frame.sublevels(h)):
                    grid[(x, h, j)] = ci.grid[(x, h, j)]
    halving = tuple(d for ci in cs for d in ci.halving)
    out = CompoundCreature(cs[0].m_dn, cs[-1].m_up, supp, columns, grid, halving)
    validate_creature(out, frame)

    floor = nmin(*[compound_norm(ci, frame, budget).total for ci in cs])
    total = compound_norm(out, frame, budget).total
    assert leq(floor, total, budget) is not False
    return out


def _dyadic_floor(x: Fraction, bits: int) -> Fraction:
    scaled = x * (1 << bits)
    return Fraction(scaled.numerator // scaled.denominator, 1 << bits)


def half(c: CompoundCreature, frame, budget: int = 1 << 12,
         precision: int = 64) -> CompoundCreature:
    """Move each level's halving parameter halfway up to that level's
    valueset floor N. Costs at most 1/maxposs of norm; exact halves when
    N is known exactly, otherwise a certified dyadic lower bound of
    (N + d)/2 (still above d, still costing at most 1/maxposs)."""
    li = [x for x in c.supp if x.kind in LIMINF_KINDS]
    new_halving = []
    for h in c.levels():
        d = c.halving_at(h)
        if not li:
            new_halving.append(d)
            continue
        floor = nmin(*[atom_norm(level_atom(c, frame, x, h), budget)[0]
                       for x in li])
        exact = as_fraction(floor)
        if exact is not None:
            if exact <= d:
                new_halving.append(d)
                continue
            target = (exact + d) / 2
            if target.denominator & (target.denominator - 1):
                target = max(d, _dyadic_floor(target, precision))
            new_halving.append(target)
            continue
        if leq(floor, rat(d), budget) is True:
            new_halving.append(d)
            continue
        lo = bounds(floor, precision)[0]
        new_halving.append(max(d, _dyadic_floor((lo + d) / 2, precision)))

    out = CompoundCreature(c.m_dn, c.m_up, c.supp, dict(c.columns),
                           dict(c.grid), tuple(new_halving))
    validate_creature(out, frame)

    mp = frame.maxposs_below(c.m_dn)
    before = compound_norm(c, frame, budget).total
    after = compound_norm(out, frame, budget).total
    assert leq(nsub(before, rat(Fraction(1, mp))), after, budget) is not False
    return out


def _singleton(sub: Subatom) -> Subatom:
    return Subatom(sub.family, frozenset({min(sub.poss, key=poss_sort_key)}))


def union_creature(c1: CompoundCreature, c2: CompoundCreature,
                   frame, budget: int = 1 << 12) -> CompoundCreature:
    """Merge two creatures over the union of their supports. They must
    share levels and halving and agree on common indices. Modesty is
    restored per level by disjointifying the atom-norm witnesses (each
    atom norm drops by at most 1) and shrinking everything outside the
    kept witness to its least singleton; both restrictions of the result
    are purely stronger than the inputs."""
    if (c1.m_dn, c1.m_up) != (c2.m_dn, c2.m_up):
        raise DomainError("union needs matching levels")
    if c1.halving != c2.halving:
        raise DomainError("union needs matching halving parameters")
    for x in set(c1.supp) & set(c2.supp):
        if x.kind == COLUMN:
            same = c1.columns[x] == c2.columns[x]
        else:
            same = all(c1.grid[(x, h, j)] == c2.grid[(x, h, j)]
                       for h in c1.levels()
                       for j in range(frame.sublevels(h)))
        if not same:
            raise DomainError(f"inputs disagree at shared index {x}")

    supp = tuple(sorted(set(c1.supp) | set(c2.supp)))
    columns = {x: (c1.columns[x] if x in c1.columns else c2.columns[x])
               for x in supp if x.kind == COLUMN}
    grid = {}
    for src in (c2, c1):
        grid.update(src.grid)

    rows = [x for x in supp if x.kind != COLUMN]
    for h in range(c1.m_dn, c1.m_up):
        if len(rows) - 1 > h:
            raise DomainError("too many graded rows to disjointify at this level")
        n_j = frame.sublevels(h)
        witnesses = []
        for x in rows:
            comps = tuple(grid[(x, h, j)] for j in range(n_j))
            witnesses.append(atom_norm(Atom(h, comps), budget, widest=True)[1])
        kept = split_index_sets(h, witnesses)
        for x, keep in zip(rows, kept):
            for j in range(n_j):
                sub = grid[(x, h, j)]
                if j not in keep and len(sub.poss) > 1:
                    grid[(x, h, j)] = _singleton(sub)

    out = CompoundCreature(c1.m_dn, c1.m_up, supp, columns, grid, c1.halving)
    validate_creature(out, frame)
    assert purely_stronger(_restrict_parts(out, c1.supp), c1)
    assert purely_stronger(_restrict_parts(out, c2.supp), c2)
    return out


def build_full(frame, m_dn: int, m_up: int, supp,
               budget: int = 1 << 12) -> CompoundCreature:
    """Largest creature the frame offers on the given rectangle: full
    columns, full subatoms, zero halving, then modesty by splitting each
    level's sublevels among the graded rows. The resulting norm must be
    exactly the width norm, i.e. everything else stays strictly wider."""
    supp = tuple(sorted(set(supp)))
    if not 2 < m_dn < m_up:
        raise DomainError("need 2 < m_dn < m_up")
    if len(supp) >= m_dn:
        raise DomainError("support too wide for the base level")
    _check_type_coverage(supp, "full creature support")

    columns = {}
    for x in supp:
        if x.kind == COLUMN:
            cubes = [column_cube(tuple(frame.sacks_interval(h)))
                     for h in range(m_dn, m_up)]
            columns[x] = reduce(column_product, cubes)

    rows = [x for x in supp if x.kind != COLUMN]
    grid = {}
    checked = {}
    for h in range(m_dn, m_up):
        n_j = frame.sublevels(h)
        for x in rows:
            for j in range(n_j):
                fam = frame.family(x, h, j)
                big = checked.get(id(fam))
                if big is None:
                    big = fam.full()
                    if compare(big.nor(), rat(0), budget) != GREATER:
                        raise DomainError(
                            f"frame has no large subatom for {x} at ({h},{j})")
                    checked[id(fam)] = big
                grid[(x, h, j)] = big
        full = frozenset(range(n_j))
        kept = split_index_sets(h, [full] * len(rows))
        for x, keep in zip(rows, kept):
            for j in range(n_j):
                if j not in keep:
                    grid[(x, h, j)] = _singleton(grid[(x, h, j)])

    out = CompoundCreature(m_dn, m_up, supp, columns, grid,
                           tuple(Fraction(0) for _ in range(m_dn, m_up)))
    validate_creature(out, frame)
    norm = compound_norm(out, frame, budget)
    verdict = compare(norm.total, norm.width, budget)
    if verdict == UNDECIDED:
        raise BudgetExceeded("could not certify the full creature's norm")
    if verdict != EQUAL:
        raise DomainError("frame cannot support a width-normed full creature")
    return out
