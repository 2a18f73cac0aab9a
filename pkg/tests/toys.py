"""Shared toy frames and creature builders for compound-level tests."""

import random
from fractions import Fraction

from creatures.compound import (COLUMN, HITTING, VALUESET, CompoundCreature,
                                Index, stacked_interval)
from creatures.sacks import Column, column_cube
from creatures.subatoms import (Subatom, hitting_family, poss_sort_key,
                                valueset_family)

VS = valueset_family(range(4), 2, enforce_largeness=False)   # full norm 2
HT = hitting_family(range(4), 3, enforce_largeness=False)    # full norm 1/3

C0 = Index(COLUMN, 0)
V1 = Index(VALUESET, 1)
H2 = Index(HITTING, 2)
SUPP = (C0, H2, V1)   # creature supports are kept sorted


class Toy:
    """Constant-parameter frame: 2-bit column intervals anchored at a base
    level, a fixed (or per-level) sublevel count, one family per kind."""

    def __init__(self, n_j=9, mw=1, mp=1, colors_=2, bits=2, base=3):
        self.n_j, self.mw, self.mp = n_j, mw, mp
        self.B, self.bits, self.base = colors_, bits, base

    def maxwidth(self, m):
        return self.mw if isinstance(self.mw, int) else self.mw(m)

    def maxposs_below(self, m):
        return self.mp

    def colors(self, m):
        return self.B

    def sacks_interval(self, h):
        lo = (h - self.base) * self.bits
        return tuple(range(lo, lo + self.bits))

    def sublevels(self, h):
        return self.n_j if isinstance(self.n_j, int) else self.n_j(h)

    def family(self, x, h, j):
        return VS if x.kind == VALUESET else HT


def least_singleton(fam):
    return Subatom(fam, frozenset({min(fam.poss, key=poss_sort_key)}))


def creature(frame, m_dn, m_up, supp, bigs=None, d=0):
    """Grid creature: full subatoms on the sublevels named by
    bigs[index][level], least singletons everywhere else."""
    bigs = bigs or {}
    cols, grid = {}, {}
    for x in supp:
        if x.kind == COLUMN:
            cols[x] = column_cube(stacked_interval(frame, m_dn, m_up))
            continue
        fam = frame.family(x, None, None)
        big, small = fam.full(), least_singleton(fam)
        mine = bigs.get(x, {})
        for h in range(m_dn, m_up):
            wide = mine.get(h, ())
            for j in range(frame.sublevels(h)):
                grid[(x, h, j)] = big if j in wide else small
    if isinstance(d, (int, Fraction)):
        halving = tuple(Fraction(d) for _ in range(m_dn, m_up))
    else:
        halving = tuple(Fraction(v) for v in d)
    return CompoundCreature(m_dn, m_up, tuple(supp), cols, grid, halving)


def random_creature(rng, toy, m_dn, m_up, supp, d=0):
    """Random modest creature: per level, disjoint big blocks for the
    graded rows (possibly empty)."""
    rows = [x for x in supp if x.kind != COLUMN]
    bigs = {x: {} for x in rows}
    for h in range(m_dn, m_up):
        n_j = toy.sublevels(h)
        marks = sorted(rng.sample(range(n_j + 1), 2 * len(rows)))
        for x, lo, hi in zip(rows, marks[::2], marks[1::2]):
            if hi > lo:
                bigs[x][h] = range(lo, hi)
    return creature(toy, m_dn, m_up, supp, bigs, d=d)


MASTER = (C0, V1, H2, Index(HITTING, 3), Index(VALUESET, 4))


def random_stack(rng, toy, parts):
    """Properly stacked random creatures, one level each, supports growing
    upward, random dyadic halvings."""
    supp = rng.sample(MASTER, rng.randint(1, 3))
    out = []
    for i in range(parts):
        base = toy.base + i
        d = Fraction(rng.randrange(4), 2)
        out.append(random_creature(rng, toy, base, base + 1, tuple(supp), d=d))
        for x in MASTER:
            if x not in supp and rng.random() < 0.4:
                supp.append(x)
    return out


# ---------------------------------------------------------------------------
# Condition-prefix toys: frames anchored at level 0
# ---------------------------------------------------------------------------

from creatures.frame import (ConditionPrefix, ToyFrame, curlywedge,  # noqa: E402
                             glue_condition, leq_check, poss_count, poss_set,
                             prune_condition)

CVS = valueset_family(range(2), 2, enforce_largeness=False)    # poss 4, nor 1
CHT = hitting_family(range(2), 2, enforce_largeness=False)     # poss 4, nor 1/2
RICH_VS = valueset_family(range(5), 2, enforce_largeness=False)  # poss 32, nor 5/2

CV1 = Index(VALUESET, 1)
CH2 = Index(HITTING, 2)
CV3 = Index(VALUESET, 3)
CSUPP = (C0, CV1, CH2)


def cond_frame(height, n_j=(1, 2, 2, 2), caps=None, bits=None, colors_=None,
               vs=CVS, ht=CHT):
    return ToyFrame(widths=[0] + [1] * (height - 1),
                    poss_caps=list(caps or [1] * height),
                    colors=list(colors_ or [2] * height),
                    bits=list(bits or [2] * height),
                    sublevel_counts=list(n_j[:height]),
                    families={"valueset": vs, "hitting": ht})


def cond_block(frame, a, b, supp=CSUPP, wide_of=None, d=0):
    """Modest block; wide_of(x, h, j) says whether a cell keeps its full
    family (default: valueset rows on even sublevels, hitting on odd)."""
    if wide_of is None:
        def wide_of(x, h, j):
            return (x.kind == VALUESET) == (j % 2 == 0)
    cols = {x: column_cube(stacked_interval(frame, a, b))
            for x in supp if x.kind == COLUMN}
    grid = {}
    for x in supp:
        if x.kind == COLUMN:
            continue
        for h in range(a, b):
            for j in range(frame.sublevels(h)):
                fam = frame.family(x, h, j)
                grid[(x, h, j)] = (fam.full() if wide_of(x, h, j)
                                  else least_singleton(fam))
    if isinstance(d, (int, Fraction)):
        d = [Fraction(d)] * (b - a)
    return CompoundCreature(a, b, tuple(supp), cols, grid, tuple(d))


def cond_trunk(frame, w0, supp=CSUPP):
    t = {}
    for x in supp:
        for h in range(w0):
            if x.kind == COLUMN:
                t[(x, h)] = 0
                continue
            for j in range(frame.sublevels(h)):
                fam = frame.family(x, h, j)
                t[(x, (h, j))] = min(fam.poss, key=poss_sort_key)
    return t


def make_condition(frame, w, supp=CSUPP, wide_of=None, d=0):
    blocks = tuple(cond_block(frame, a, b, supp, wide_of, d)
                   for a, b in zip(w, w[1:]))
    return ConditionPrefix(w, blocks, cond_trunk(frame, w[0], supp))


# Norm-rich profile: wide valueset rows measure 5/2, 7/3, 9/4 at levels
# 1..3, so norms stay above 1/8 through one halving round.
RICH_N_J = (1, 324, 2916, 26244)
RICH_WIDE = {1: 243, 2: 2187, 3: 19683}


def rich_frame(height):
    return cond_frame(height, n_j=RICH_N_J, vs=RICH_VS, ht=CHT)


def rich_condition(frame, w):
    def wide_of(x, h, j):
        split = RICH_WIDE[h]
        return j < split if x.kind == VALUESET else j >= split
    return make_condition(frame, w, wide_of=wide_of)


def shrink_cell(p, i, key, size):
    """Strengthen one grid cell of block i down to its first `size` values."""
    c = p.creatures[i]
    poss = sorted(c.grid[key].poss, key=poss_sort_key)[:size]
    grid = dict(c.grid)
    grid[key] = Subatom(c.grid[key].family, frozenset(poss))
    block = CompoundCreature(c.m_dn, c.m_up, c.supp, c.columns, grid, c.halving)
    creatures = p.creatures[:i] + (block,) + p.creatures[i + 1:]
    return ConditionPrefix(p.w, creatures, dict(p.trunk))


def random_strengthen(rng, p, frame, budget=1 << 14):
    """One random step down the order; returns a prefix <= p."""
    ops = ["curly", "halving", "shrink", "thin", "glue", "wedge"]
    for _ in range(8):
        op = rng.choice(ops)
        try:
            if op == "curly":
                m = rng.choice(p.w[:-1])
                u = (m, rng.randrange(-1, frame.sublevels(m)))
                if poss_count(p, frame, u) > budget:
                    continue
                etas = list(poss_set(p, frame, u, budget=budget).entries())
                return curlywedge(p, frame, rng.choice(etas), u)
            if op == "wedge" and len(p.w) > 2:
                from creatures.frame import wedge as _wedge
                ell = rng.choice(p.w[1:-1])
                if poss_count(p, frame, (ell, -1)) > budget:
                    continue
                etas = list(poss_set(p, frame, (ell, -1), budget=budget).entries())
                return _wedge(p, frame, rng.choice(etas), ell)
            if op == "halving":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                k = rng.choice(list(c.levels()))
                halving = list(c.halving)
                halving[k - c.m_dn] += Fraction(1, 1 << rng.randrange(1, 4))
                block = CompoundCreature(c.m_dn, c.m_up, c.supp, c.columns,
                                         c.grid, tuple(halving))
                return ConditionPrefix(
                    p.w, p.creatures[:i] + (block,) + p.creatures[i + 1:],
                    dict(p.trunk))
            if op == "shrink":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                wide = [k for k, sub in c.grid.items() if len(sub.poss) > 1]
                if not wide:
                    continue
                key = rng.choice(sorted(wide, key=repr))
                size = rng.randrange(1, len(c.grid[key].poss))
                return shrink_cell(p, i, key, size)
            if op == "thin":
                i = rng.randrange(len(p.creatures))
                c = p.creatures[i]
                if not c.column_indices():
                    continue
                x = rng.choice(c.column_indices())
                branches = sorted(c.columns[x].branches)
                if len(branches) < 2:
                    continue
                keep = rng.sample(branches, rng.randrange(1, len(branches)))
                cols = dict(c.columns)
                cols[x] = Column(c.columns[x].interval, frozenset(keep))
                block = CompoundCreature(c.m_dn, c.m_up, c.supp, cols,
                                         c.grid, c.halving)
                return ConditionPrefix(
                    p.w, p.creatures[:i] + (block,) + p.creatures[i + 1:],
                    dict(p.trunk))
            if op == "glue" and len(p.w) > 2:
                drop = rng.choice(p.w[1:-1])
                return glue_condition(
                    p, tuple(a for a in p.w if a != drop), frame)
        except ValueError:
            continue
    return p
