"""Finite condition prefixes over a frame.

A prefix states a strictly increasing tuple of levels, one compound
creature per consecutive pair, and a trunk of committed values below each
index's first appearance.  Everything an infinite condition would carry
above the roof is simply absent; operations that would need it raise
InsufficientPrefix instead of guessing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from ..compound import (COLUMN, CompoundCreature, compound_norm, glue, half,
                        purely_stronger, restrict, validate_creature)
from ..exactnum import (EQUAL, GREATER, UNDECIDED, BudgetExceeded,
                        DomainError, compare, geq, nsub, rat)
from ..sacks import Column, column_product, prune_to_split
from ..subatoms import Subatom, poss_sort_key


class InsufficientPrefix(DomainError):
    """The operation needs more of the condition than the prefix holds."""


class PreconditionError(DomainError):
    """A declared precondition fails on the given inputs."""


# ---------------------------------------------------------------------------
# The prefix type
# ---------------------------------------------------------------------------

@dataclass
class ConditionPrefix:
    w: tuple[int, ...]
    creatures: tuple[CompoundCreature, ...]
    trunk: dict

    def __post_init__(self):
        self.w = tuple(self.w)
        self.creatures = tuple(self.creatures)
        self.trunk = dict(self.trunk)
        if any(a >= b for a, b in zip(self.w, self.w[1:])):
            raise DomainError("w-levels must increase strictly")
        if self.w and (len(self.w) < 2 or self.w[0] < 0):
            raise DomainError("a nonempty prefix needs two or more w-levels")
        if len(self.creatures) != max(len(self.w) - 1, 0):
            raise DomainError("one creature per consecutive w-pair")
        for a, b, c in zip(self.w, self.w[1:], self.creatures):
            if (c.m_dn, c.m_up) != (a, b):
                raise DomainError(
                    f"creature spans [{c.m_dn}, {c.m_up}) instead of "
                    f"[{a}, {b})")

    @property
    def empty(self) -> bool:
        return not self.w

    @property
    def height(self) -> int:
        if self.empty:
            raise InsufficientPrefix("the empty prefix has no roof")
        return self.w[-1]

    def block_index(self, h: int) -> int:
        for i, (a, b) in enumerate(zip(self.w, self.w[1:])):
            if a <= h < b:
                return i
        raise InsufficientPrefix(f"no block covers level {h}")

    def creature_on(self, h: int) -> CompoundCreature:
        """The creature whose level span contains h."""
        return self.creatures[self.block_index(h)]

    def creature_starting(self, h: int) -> CompoundCreature:
        if h not in self.w[:-1]:
            raise DomainError(f"{h} does not start a block")
        return self.creatures[self.w.index(h)]

    def universe(self) -> tuple:
        seen = set()
        for c in self.creatures:
            seen.update(c.supp)
        return tuple(sorted(seen))

    def trunk_lengths(self) -> dict:
        out = {}
        for i, c in enumerate(self.creatures):
            for x in c.supp:
                out.setdefault(x, self.w[i])
        return out


def empty_condition() -> ConditionPrefix:
    return ConditionPrefix((), (), {})


def _bit_offsets(frame, height: int) -> tuple[int, ...]:
    """Start positions of the column blocks; the blocks must tile an
    initial segment of the index line for trunk strings to be plain ints."""
    starts, expected = [], 0
    for h in range(height):
        iv = frame.sacks_interval(h)
        if not iv or iv[0] != expected or tuple(iv) != tuple(
                range(iv[0], iv[-1] + 1)):
            raise DomainError("column blocks must tile the index line "
                              "consecutively from position 0")
        starts.append(expected)
        expected += len(iv)
    starts.append(expected)
    return tuple(starts)


def _block_width(frame, h: int) -> int:
    return len(frame.sacks_interval(h))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionVerdict:
    valid: bool
    failures: tuple[tuple[str, str], ...]
    trunk_lengths: Mapping
    notes: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def validate_condition(p: ConditionPrefix, frame,
                       schedule: Sequence | None = None,
                       budget: int = 1 << 12) -> ConditionVerdict:
    """Structural verdict: creature validity, support monotonicity, the
    exact trunk domain, and (optionally) a per-block norm schedule."""
    if p.empty:
        return ConditionVerdict(
            True, (), {}, ("the empty prefix is the weakest condition",))
    failures: list[tuple[str, str]] = []
    trkl = p.trunk_lengths()

    for a, c in zip(p.w, p.creatures):
        try:
            validate_creature(c, frame)
        except DomainError as err:
            failures.append(("creature", f"block at {a}: {err}"))
    for i, (c, d) in enumerate(zip(p.creatures, p.creatures[1:])):
        if not set(c.supp) <= set(d.supp):
            failures.append((
                "support-monotone",
                f"support shrinks from block {p.w[i]} to {p.w[i + 1]}"))

    try:
        _bit_offsets(frame, p.height)
        required = _required_trunk(p, frame, trkl)
    except DomainError as err:
        failures.append(("trunk-domain", str(err)))
        required = None
    if required is not None:
        missing = [k for k in required if k not in p.trunk]
        extra = [k for k in p.trunk if k not in required]
        for k in missing[:3]:
            failures.append(("trunk-domain", f"trunk misses {k}"))
        for k in extra[:3]:
            failures.append(("trunk-domain",
                             f"trunk key {k} lies outside its domain"))
        for k in required:
            if k in p.trunk and not required[k](p.trunk[k]):
                failures.append(("trunk-value",
                                 f"trunk value at {k} is not available"))

    if schedule is not None:
        if len(schedule) != len(p.creatures):
            failures.append(("norm-schedule",
                             "schedule length differs from the block count"))
        else:
            for a, c, target in zip(p.w, p.creatures, schedule):
                try:
                    got = geq(compound_norm(c, frame, budget).total,
                              rat(Fraction(target)), budget)
                except DomainError as err:
                    failures.append(("norm-schedule", f"block at {a}: {err}"))
                    continue
                if got is not True:
                    state = "undecided at this budget" if got is None \
                        else "missed"
                    failures.append((
                        "norm-schedule",
                        f"block at {a} {state} its target {target}"))
    notes = () if schedule is not None else (
        "no norm schedule declared; divergence is not finitely checkable",)
    return ConditionVerdict(not failures, tuple(failures), trkl, notes)


def _required_trunk(p: ConditionPrefix, frame, trkl) -> dict:
    """Map of required trunk keys to value-admissibility predicates."""
    req: dict = {}
    for x, upto in trkl.items():
        if x.kind == COLUMN:
            for h in range(upto):
                top = 1 << _block_width(frame, h)
                req[(x, h)] = (
                    lambda v, top=top: isinstance(v, int) and 0 <= v < top)
        else:
            for h in range(upto):
                for j in range(frame.sublevels(h)):
                    fam = frame.family(x, h, j)
                    if fam.poss is None:
                        req[(x, (h, j))] = lambda v: True
                    else:
                        req[(x, (h, j))] = (
                            lambda v, poss=fam.poss: v in poss)
    return req


# ---------------------------------------------------------------------------
# Possibility sets
# ---------------------------------------------------------------------------

PER_INDEX = "perIndex"
PER_SUBLEVEL = "perSublevel"


@dataclass(frozen=True)
class PossFactor:
    key: object
    choices: tuple


@dataclass(frozen=True)
class PossibilitySet:
    variant: str
    sublevel: tuple[int, int]
    factors: tuple[PossFactor, ...]

    @property
    def count(self) -> int:
        n = 1
        for f in self.factors:
            n *= len(f.choices)
        return n

    def entries(self):
        keys = [f.key for f in self.factors]
        for combo in itertools.product(*[f.choices for f in self.factors]):
            yield dict(zip(keys, combo))

    def contains(self, eta: Mapping) -> bool:
        if set(eta) != {f.key for f in self.factors}:
            return False
        return all(eta[f.key] in f.choices for f in self.factors)


def _check_sublevel(p: ConditionPrefix, u) -> tuple[int, int]:
    m, j = u
    if j < -1 or m < 0:
        raise DomainError(f"{u} is not a sublevel")
    if p.empty or m >= p.height:
        raise InsufficientPrefix(
            f"sublevel {u} is not strictly below the prefix roof")
    return (m, j)


def _sacks_reach(p: ConditionPrefix, trk: int, u) -> int:
    """Level whose block start caps the committed bits of a column index:
    u's own level if it sits on a block boundary, else the least boundary
    or trunk level strictly above."""
    m, j = u
    if j == -1 and m in p.w:
        return m
    for c in sorted(set(range(trk)) | set(p.w)):
        if c > m:
            return c
    raise InsufficientPrefix(f"no boundary above {u}")


def _column_blocks(p: ConditionPrefix, trk: int, reach: int):
    """Consecutive block starts a with trk <= a and block end <= reach."""
    for i, a in enumerate(p.w[:-1]):
        if a >= trk and p.w[i + 1] <= reach:
            yield a


def _trunk_prefix_bits(p: ConditionPrefix, offsets, x, upto: int) -> int:
    bits = 0
    for h in range(upto):
        bits |= p.trunk[(x, h)] << offsets[h]
    return bits


def _subatomic_cells_below(frame, u, height: int):
    m, j = u
    for h in range(min(m + 1, height)):
        top = frame.sublevels(h) if h < m else max(j, 0)
        for jj in range(top):
            yield (h, jj)


def _cell_choices(p: ConditionPrefix, trkl, x, h: int, j: int) -> tuple:
    if h < trkl[x]:
        return (p.trunk[(x, (h, j))],)
    sub = p.creature_on(h).grid[(x, h, j)]
    return tuple(sorted(sub.poss, key=poss_sort_key))


def _per_index_factors(p: ConditionPrefix, frame, u, offsets,
                       budget: int | None):
    trkl = p.trunk_lengths()
    factors: list[PossFactor] = []
    sizes: list[tuple[object, int]] = []
    for x in p.universe():
        if x.kind == COLUMN:
            reach = _sacks_reach(p, trkl[x], u)
            base = _trunk_prefix_bits(p, offsets, x, min(trkl[x], reach))
            blocks = [(a, p.creature_starting(a).columns[x])
                      for a in _column_blocks(p, trkl[x], reach)]
            n = 1
            for _, col in blocks:
                n *= len(col.branches)
            sizes.append((x, n))
            if budget is not None:
                acc = [base]
                for a, col in blocks:
                    acc = [v | (br << offsets[a]) for v in acc
                           for br in sorted(col.branches)]
                factors.append(PossFactor(x, tuple(acc)))
        else:
            for h, j in _subatomic_cells_below(frame, u, p.height):
                choices = _cell_choices(p, trkl, x, h, j)
                sizes.append(((x, (h, j)), len(choices)))
                if budget is not None:
                    factors.append(PossFactor((x, (h, j)), choices))
    return factors, sizes


def _per_sublevel_factors(p: ConditionPrefix, frame, u, offsets,
                          budget: int | None):
    m, j_u = u
    factors: list[PossFactor] = []
    sizes: list[tuple[object, int]] = []
    w_starts = set(p.w[:-1])
    for ell in range(m + 1):
        block_visible = ell < m or (ell == m and j_u >= 0)
        if block_visible and ell in w_starts:
            c = p.creature_starting(ell)
            cols = [(x, c.columns[x]) for x in c.column_indices()]
            if cols:
                n = 1
                for _, col in cols:
                    n *= len(col.branches)
                sizes.append((("blocks", ell), n))
                if budget is not None:
                    per = [[(x, br) for br in sorted(col.branches)]
                           for x, col in cols]
                    choices = tuple(itertools.product(*per))
                    factors.append(PossFactor(("blocks", ell), choices))
        if ell < p.w[0] or ell >= p.height:
            continue
        c = p.creature_on(ell)
        top = frame.sublevels(ell) if ell < m else max(j_u, 0)
        for jj in range(top):
            wide = [x for x in c.row_indices()
                    if len(c.grid[(x, ell, jj)].poss) > 1]
            if len(wide) > 1:
                raise DomainError(f"two graded rows at ({ell}, {jj})")
            if wide:
                x = wide[0]
                choices = tuple(sorted(c.grid[(x, ell, jj)].poss,
                                       key=poss_sort_key))
                sizes.append((("cell", ell, jj, x), len(choices)))
                if budget is not None:
                    factors.append(
                        PossFactor(("cell", ell, jj, x), choices))
    return factors, sizes


def poss_count(p: ConditionPrefix, frame, u,
               variant: str = PER_INDEX) -> int:
    u = _check_sublevel(p, u)
    offsets = _bit_offsets(frame, p.height)
    plan = (_per_index_factors if variant == PER_INDEX
            else _per_sublevel_factors)
    _, sizes = plan(p, frame, u, offsets, budget=None)
    n = 1
    for _, k in sizes:
        n *= k
    return n


def poss_set(p: ConditionPrefix, frame, u, variant: str = PER_INDEX,
             budget: int = 1 << 16) -> PossibilitySet:
    if variant not in (PER_INDEX, PER_SUBLEVEL):
        raise DomainError(f"unknown possibility variant {variant!r}")
    u = _check_sublevel(p, u)
    n = poss_count(p, frame, u, variant)
    if n > budget:
        raise BudgetExceeded(
            f"{n} possibilities exceed the enumeration budget {budget}")
    offsets = _bit_offsets(frame, p.height)
    plan = (_per_index_factors if variant == PER_INDEX
            else _per_sublevel_factors)
    factors, _ = plan(p, frame, u, offsets, budget=budget)
    return PossibilitySet(variant, u, tuple(factors))


def iota(p: ConditionPrefix, frame, u, eta: Mapping) -> dict:
    """Regroup a per-index possibility into its per-sublevel form."""
    u = _check_sublevel(p, u)
    offsets = _bit_offsets(frame, p.height)
    out = {}
    factors, _ = _per_sublevel_factors(p, frame, u, offsets, budget=0)
    for f in factors:
        if f.key[0] == "blocks":
            ell = f.key[1]
            c = p.creature_starting(ell)
            end = p.w[p.w.index(ell) + 1]
            width = offsets[end] - offsets[ell]
            out[f.key] = tuple(
                (x, (eta[x] >> offsets[ell]) & ((1 << width) - 1))
                for x in c.column_indices())
        else:
            _, ell, jj, x = f.key
            out[f.key] = eta[(x, (ell, jj))]
    return out


# ---------------------------------------------------------------------------
# Wedges
# ---------------------------------------------------------------------------

def _split_column_bits(frame, offsets, value: int, upto: int) -> dict:
    masks = {}
    for h in range(upto):
        masks[h] = (value >> offsets[h]) & ((1 << _block_width(frame, h)) - 1)
    return masks


def wedge(p: ConditionPrefix, frame, eta: Mapping,
          level: int) -> ConditionPrefix:
    """Commit one possibility below a block boundary: the blocks under
    `level` disappear into the trunk."""
    if p.empty or level not in p.w[:-1]:
        raise InsufficientPrefix(
            "the wedge level must start a block of the prefix")
    ps = poss_set(p, frame, (level, -1), PER_INDEX)
    if not ps.contains(eta):
        raise DomainError("possibility does not belong to this set")
    offsets = _bit_offsets(frame, p.height)
    i = p.w.index(level)
    trunk = {k: v for k, v in p.trunk.items() if _key_level(k) >= level}
    for key, val in eta.items():
        if isinstance(key, tuple):
            x, (h, j) = key
            trunk[(x, (h, j))] = val
        else:
            for h, mask in _split_column_bits(
                    frame, offsets, val, level).items():
                trunk[(key, h)] = mask
    q = ConditionPrefix(p.w[i:], p.creatures[i:], trunk)
    assert validate_condition(q, frame).valid
    assert leq_check(q, p, frame).ok
    return q


def _key_level(key) -> int:
    return key[1] if isinstance(key[1], int) else key[1][0]


def curlywedge(p: ConditionPrefix, frame, eta: Mapping,
               u) -> ConditionPrefix:
    """Commit one possibility in place: the chosen cells shrink to
    singletons and the chosen column blocks to single branches, with the
    block structure untouched."""
    u = _check_sublevel(p, u)
    ps = poss_set(p, frame, u, PER_INDEX)
    if not ps.contains(eta):
        raise DomainError("possibility does not belong to this set")
    offsets = _bit_offsets(frame, p.height)
    trkl = p.trunk_lengths()
    m, j_u = u
    new_creatures = []
    for i, c in enumerate(p.creatures):
        cols = dict(c.columns)
        grid = dict(c.grid)
        a, b = p.w[i], p.w[i + 1]
        if a < m or (a == m and j_u >= 0):
            for x in c.column_indices():
                width = offsets[b] - offsets[a]
                branch = (eta[x] >> offsets[a]) & ((1 << width) - 1)
                cols[x] = Column(c.columns[x].interval, frozenset({branch}))
        for key, val in eta.items():
            if not isinstance(key, tuple):
                continue
            x, (h, j) = key
            if a <= h < b and h >= trkl[x]:
                grid[(x, h, j)] = Subatom(grid[(x, h, j)].family,
                                          frozenset({val}))
        new_creatures.append(CompoundCreature(
            c.m_dn, c.m_up, c.supp, cols, grid, c.halving))
    q = ConditionPrefix(p.w, tuple(new_creatures), dict(p.trunk))
    assert validate_condition(q, frame).valid
    assert leq_check(q, p, frame).ok
    return q


# ---------------------------------------------------------------------------
# The order check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeqVerdict:
    ok: bool
    clauses: tuple[tuple[str, bool, str], ...]
    notes: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def _ok(cid: str, msg: str = "") -> tuple[str, bool, str]:
    return (cid, True, msg)


def _bad(cid: str, msg: str) -> tuple[str, bool, str]:
    return (cid, False, msg)


def leq_check(q: ConditionPrefix, p: ConditionPrefix, frame,
              budget: int = 1 << 12) -> LeqVerdict:
    """Per-clause verdict on whether q strengthens p."""
    if p.empty:
        return LeqVerdict(True, (), ("everything strengthens the empty "
                                     "prefix",))
    if q.empty:
        return LeqVerdict(False, (_bad("w-subset", "the empty prefix only "
                                       "strengthens itself"),))
    if q.height != p.height:
        raise InsufficientPrefix(
            f"prefixes end at different roofs {q.height} != {p.height}")
    clauses: list[tuple[str, bool, str]] = []

    if not set(q.w) <= set(p.w):
        return LeqVerdict(False, (_bad(
            "w-subset", f"{sorted(set(q.w) - set(p.w))} are not block "
            "boundaries of the weaker prefix"),),
            ("later clauses not evaluated",))
    clauses.append(_ok("w-subset"))

    p_universe = set(p.universe())
    bad = []
    for h in q.w[:-1]:
        traced = p_universe & set(q.creature_starting(h).supp)
        if traced != set(p.creature_starting(h).supp):
            bad.append(h)
    clauses.append(_ok("support-trace") if not bad else _bad(
        "support-trace", f"trace mismatch at blocks {bad}"))

    offsets = _bit_offsets(frame, p.height)
    trk_p, trk_q = p.trunk_lengths(), q.trunk_lengths()
    bad = []
    for x in sorted(set(trk_q) & set(trk_p)):
        if trk_q[x] < trk_p[x]:
            bad.append(f"{x} appears below its place in the weaker prefix")
            continue
        try:
            bad.extend(_trunk_clause_failures(
                q, p, frame, offsets, x, trk_p[x], trk_q[x]))
        except KeyError as err:
            bad.append(f"{x}: trunk misses {err}")
    clauses.append(_ok("trunk") if not bad else _bad(
        "trunk", "; ".join(bad[:3])))

    bad = []
    for x in sorted(set(trk_q) & set(trk_p)):
        if x.kind == COLUMN:
            continue
        for h in range(trk_q[x], q.height):
            for j in range(frame.sublevels(h)):
                mine = q.creature_on(h).grid[(x, h, j)].poss
                theirs = p.creature_on(h).grid[(x, h, j)].poss
                if not mine <= theirs:
                    bad.append(f"cell ({x}, {h}, {j}) grew")
    clauses.append(_ok("cells") if not bad else _bad(
        "cells", "; ".join(bad[:3])))

    bad = []
    for x in sorted(set(trk_q) & set(trk_p)):
        if x.kind != COLUMN:
            continue
        for i, a in enumerate(q.w[:-1]):
            if a < trk_q[x]:
                continue
            b = q.w[i + 1]
            parts = [p.creature_starting(s).columns[x]
                     for s in p.w if a <= s < b]
            prod = parts[0]
            for part in parts[1:]:
                prod = column_product(prod, part)
            mine = q.creature_starting(a).columns[x]
            if mine.interval != prod.interval:
                bad.append(f"column {x} at {a}: interval mismatch")
            elif not mine.branches <= prod.branches:
                bad.append(f"column {x} at {a} grew")
    clauses.append(_ok("columns") if not bad else _bad(
        "columns", "; ".join(bad[:3])))

    bad = []
    for h in range(q.w[0], q.height):
        if q.creature_on(h).halving_at(h) < p.creature_on(h).halving_at(h):
            bad.append(h)
    clauses.append(_ok("halving") if not bad else _bad(
        "halving", f"halving parameters drop at levels {bad}"))

    return LeqVerdict(all(c[1] for c in clauses), tuple(clauses))


def _trunk_clause_failures(q, p, frame, offsets, x, tp: int, tq: int):
    """Shared-prefix equality below tp, then committed values inside the
    weaker prefix's possibilities on [tp, tq)."""
    out = []
    if x.kind == COLUMN:
        for h in range(tp):
            if q.trunk[(x, h)] != p.trunk[(x, h)]:
                out.append(f"column trunk differs at ({x}, {h})")
        for i, a in enumerate(p.w[:-1]):
            if not tp <= a or not p.w[i + 1] <= tq:
                continue
            branch = 0
            for h in range(a, p.w[i + 1]):
                branch |= q.trunk[(x, h)] << (offsets[h] - offsets[a])
            if branch not in p.creature_starting(a).columns[x].branches:
                out.append(f"committed branch at ({x}, {a}) is not "
                           "available in the weaker prefix")
    else:
        for h in range(tp):
            for j in range(frame.sublevels(h)):
                if q.trunk[(x, (h, j))] != p.trunk[(x, (h, j))]:
                    out.append(f"trunk differs at ({x}, ({h}, {j}))")
        for h in range(tp, tq):
            for j in range(frame.sublevels(h)):
                if q.trunk[(x, (h, j))] not in \
                        p.creature_on(h).grid[(x, h, j)].poss:
                    out.append(f"committed value at ({x}, ({h}, {j})) is "
                               "not available in the weaker prefix")
    return out


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------

def prune_condition(p: ConditionPrefix, frame,
                    budget: int = 1 << 12) -> ConditionPrefix:
    """Thin every column to at most 2^(leading block width) branches.
    Certifies that each block's norm is unchanged, and that supports are
    narrower than their level wherever the norm certifies > 1."""
    if p.empty:
        return p
    new_creatures = []
    for a, c in zip(p.w, p.creatures):
        lead = _block_width(frame, a)
        cols = {}
        for x in c.column_indices():
            col = c.columns[x]
            if len(col.branches) > (1 << lead):
                col = prune_to_split(col, lead)
            cols[x] = col
        d = CompoundCreature(c.m_dn, c.m_up, c.supp, cols, c.grid, c.halving)
        assert purely_stronger(d, c)
        before = compound_norm(c, frame, budget).total
        after = compound_norm(d, frame, budget).total
        got = compare(before, after, budget)
        if got == UNDECIDED:
            raise BudgetExceeded("norm comparison undecided while pruning")
        assert got == EQUAL, "pruning changed a block norm"
        if compare(after, rat(1), budget) == GREATER:
            assert len(d.supp) < a, "support too wide for a norm above 1"
        new_creatures.append(d)
    q = ConditionPrefix(p.w, tuple(new_creatures), dict(p.trunk))
    assert leq_check(q, p, frame).ok
    return q


# ---------------------------------------------------------------------------
# Gluing
# ---------------------------------------------------------------------------

def glue_condition(p: ConditionPrefix, U: Sequence[int], frame,
                   budget: int = 1 << 12) -> ConditionPrefix:
    """Merge blocks between consecutive members of U.  Creature cells of
    indices that only appear strictly inside a merged stretch turn into
    committed trunk values, chosen least-first among what p allows."""
    if p.empty:
        raise InsufficientPrefix("nothing to glue in the empty prefix")
    U = tuple(sorted(set(U)))
    if not set(U) <= set(p.w):
        raise DomainError("gluing points must be block boundaries")
    if not U or U[0] != p.w[0]:
        raise DomainError("gluing must preserve the base level")
    if U[-1] != p.w[-1]:
        raise DomainError("gluing must keep the prefix roof")
    if U == p.w:
        return ConditionPrefix(p.w, p.creatures, dict(p.trunk))

    offsets = _bit_offsets(frame, p.height)
    trk_p = p.trunk_lengths()
    new_creatures = []
    for a, b in zip(U, U[1:]):
        parts = [p.creature_starting(s) for s in p.w if a <= s < b]
        new_creatures.append(glue(parts, frame, budget))

    starts = [a for a, c in zip(U, new_creatures)]
    trunk = dict(p.trunk)
    for x, tp in sorted(trk_p.items()):
        tq = next((a for a, c in zip(starts, new_creatures)
                   if x in set(c.supp)), None)
        if tq is None:
            for key in [k for k in trunk if k[0] == x]:
                del trunk[key]
            continue
        if x.kind == COLUMN:
            for i, a in enumerate(p.w[:-1]):
                if not tp <= a or not p.w[i + 1] <= tq:
                    continue
                branch = min(p.creature_starting(a).columns[x].branches)
                for k in range(a, p.w[i + 1]):
                    trunk[(x, k)] = (branch >> (offsets[k] - offsets[a])) \
                        & ((1 << _block_width(frame, k)) - 1)
        else:
            for h in range(tp, tq):
                for j in range(frame.sublevels(h)):
                    poss = p.creature_on(h).grid[(x, h, j)].poss
                    trunk[(x, (h, j))] = min(poss, key=poss_sort_key)
    q = ConditionPrefix(U, tuple(new_creatures), trunk)
    assert validate_condition(q, frame).valid
    assert leq_check(q, p, frame).ok
    return q


# ---------------------------------------------------------------------------
# Halving and unhalving
# ---------------------------------------------------------------------------

def half_condition(p: ConditionPrefix, frame, from_level: int,
                   budget: int = 1 << 12) -> ConditionPrefix:
    """Raise the halving parameters of every block from `from_level` up."""
    if p.empty or from_level not in p.w[:-1]:
        raise InsufficientPrefix("halving must start at a block boundary")
    out = [half(c, frame, budget) if a >= from_level else c
           for a, c in zip(p.w, p.creatures)]
    q = ConditionPrefix(p.w, tuple(out), dict(p.trunk))
    assert leq_check(q, p, frame).ok
    return q


def unhalve(q: ConditionPrefix, h: int, r: ConditionPrefix, frame,
            M, budget: int = 1 << 12) -> ConditionPrefix:
    """Recover large norms at h from a strengthening r of half(q, >=h).

    Glues r's blocks up to the first stretch where its norms exceed M,
    restricts to q's support at h, and restores q's halving parameters
    there; everything above is kept from r verbatim.
    """
    M = Fraction(M)
    if q.empty or h not in q.w[:-1]:
        raise InsufficientPrefix("h must start a block of q")
    for a, c in zip(q.w, q.creatures):
        if a >= h and geq(compound_norm(c, frame, budget).total,
                          rat(M), budget) is not True:
            raise PreconditionError(f"q's block at {a} is not certified "
                                    f">= {M}")
    if r.empty or r.w[0] != h:
        raise PreconditionError("r must start exactly at h")
    hq = half_condition(q, frame, h, budget)
    if not leq_check(r, hq, frame, budget).ok:
        raise PreconditionError("r must strengthen the halved condition")
    r_norms = {a: compound_norm(c, frame, budget)
               for a, c in zip(r.w, r.creatures)}
    for a, n in r_norms.items():
        if compare(n.total, rat(0), budget) != GREATER:
            raise PreconditionError(f"r's block at {a} lacks a positive "
                                    "norm")

    h0 = None
    for a in r.w[1:-1]:
        if all(compare(r_norms[s].total, rat(M), budget) == GREATER
               for s in r.w[:-1] if s >= a):
            h0 = a
            break
    if h0 is None:
        raise InsufficientPrefix(
            "no block of r has certified norms above the target from "
            "there on; a longer prefix is needed")
    h1 = r.w[r.w.index(h0) + 1]

    lower = [c for a, c in zip(r.w, r.creatures) if h <= a < h1]
    supp_qh = q.creature_starting(h).supp
    d0 = glue(lower, frame, budget)
    d1 = restrict(d0, supp_qh, frame, budget)
    d = CompoundCreature(
        d1.m_dn, d1.m_up, d1.supp, d1.columns, d1.grid,
        tuple(q.creature_on(k).halving_at(k) for k in range(h, h1)))
    validate_creature(d, frame)

    offsets = _bit_offsets(frame, r.height)
    trk_r = r.trunk_lengths()
    upper = [(a, c) for a, c in zip(r.w, r.creatures) if a >= h1]
    s_universe = set(supp_qh)
    for _, c in upper:
        s_universe |= set(c.supp)
    trunk = {k: v for k, v in r.trunk.items() if k[0] in s_universe}
    for x in sorted(set(trk_r) & s_universe - set(supp_qh)):
        if x.kind == COLUMN:
            for i, a in enumerate(r.w[:-1]):
                if not trk_r[x] <= a or not r.w[i + 1] <= h1:
                    continue
                branch = min(r.creature_starting(a).columns[x].branches)
                for k in range(a, r.w[i + 1]):
                    trunk[(x, k)] = (branch >> (offsets[k] - offsets[a])) \
                        & ((1 << _block_width(frame, k)) - 1)
        else:
            for k in range(trk_r[x], h1):
                for j in range(frame.sublevels(k)):
                    poss = r.creature_on(k).grid[(x, k, j)].poss
                    trunk[(x, (k, j))] = min(poss, key=poss_sort_key)
    s = ConditionPrefix((h,) + tuple(a for a, _ in upper) + (r.height,)
                        if upper else (h, h1),
                        (d,) + tuple(c for _, c in upper), trunk)

    assert validate_condition(s, frame).valid
    assert s.w[0] == h
    assert leq_check(s, q, frame, budget).ok
    assert set(d.supp) == set(supp_qh)
    for a, c in upper:
        assert s.creature_starting(a) is c
        assert geq(compound_norm(c, frame, budget).total, rat(M),
                   budget) is True
    mp = frame.maxposs_below(h)
    nd = compound_norm(d, frame, budget)
    assert geq(nd.total, nsub(rat(M), rat(Fraction(1, mp))),
               budget) is not False
    for k, val in nd.per_level.items():
        qn = compound_norm(q.creature_on(k), frame, budget).per_level[k]
        assert geq(val, nsub(qn, rat(Fraction(1, mp))),
                   budget) is not False, f"recovered level {k} too small"
    _assert_poss_below_shrinks(s, r, frame, h1)
    return s


def _assert_poss_below_shrinks(s: ConditionPrefix, r: ConditionPrefix,
                               frame, h1: int) -> None:
    """Cellwise containment of s's choices below h1 in r's."""
    trk_s, trk_r = s.trunk_lengths(), r.trunk_lengths()
    for x in s.universe():
        if x not in trk_r:
            continue
        if x.kind != COLUMN:
            for h in range(h1):
                for j in range(frame.sublevels(h)):
                    mine = {s.trunk[(x, (h, j))]} if h < trk_s[x] else \
                        s.creature_on(h).grid[(x, h, j)].poss
                    theirs = {r.trunk[(x, (h, j))]} if h < trk_r[x] else \
                        r.creature_on(h).grid[(x, h, j)].poss
                    assert set(mine) <= set(theirs)
            continue
        offsets = _bit_offsets(frame, r.height)
        mine = _column_strings(s, frame, offsets, x, h1, trk_s[x])
        theirs = _column_strings(r, frame, offsets, x, h1, trk_r[x])
        assert mine <= theirs


def _column_strings(p: ConditionPrefix, frame, offsets, x, upto: int,
                    trk: int) -> set[int]:
    """All committed-bit strings of a column index over [0, upto)."""
    acc = [_trunk_prefix_bits(p, offsets, x, min(trk, upto))]
    for i, a in enumerate(p.w[:-1]):
        if not trk <= a or not p.w[i + 1] <= upto:
            continue
        col = p.creature_starting(a).columns[x]
        acc = [v | (br << offsets[a]) for v in acc for br in col.branches]
    return set(acc)


# ---------------------------------------------------------------------------
# Simultaneous bigness over several graded slots
# ---------------------------------------------------------------------------

def strong_bigness_homogenize(subatoms: Sequence[Subatom],
                              anchors: Sequence[int],
                              coloring: Callable[..., int],
                              budget: int = 1 << 12):
    """Shrink one subatom per slot, top slot first, so that the coloring
    of the choice product becomes constant; each shrink is a single
    strong-bigness application costing at most 1/anchor in norm.

    Returns the shrunken subatoms and the constant color.
    """
    if not subatoms or len(subatoms) != len(anchors):
        raise DomainError("one anchor per subatom")
    if any(b < 1 for b in anchors):
        raise DomainError("anchors must be positive")
    poss = [tuple(sorted(s.poss, key=poss_sort_key)) for s in subatoms]
    below = 1
    for i, b in enumerate(anchors):
        if below >= b:
            raise PreconditionError(
                f"{below} choice prefixes reach the anchor {b} at slot {i}")
        below *= len(poss[i])

    out = list(subatoms)
    shrunk = list(poss)
    for i in reversed(range(len(out))):
        prefixes = list(itertools.product(*shrunk[:i]))

        def signature(val):
            return tuple(coloring(*pre, val, *[ch[0] for ch in
                                               shrunk[i + 1:]])
                         for pre in prefixes)

        classes: dict = {}
        for val in shrunk[i]:
            classes.setdefault(signature(val), []).append(val)
        if len(classes) > anchors[i]:
            raise PreconditionError(
                f"the induced coloring at slot {i} needs {len(classes)} "
                f"colors, above the anchor {anchors[i]}")
        best, best_nor = None, None
        target = nsub(out[i].nor(), rat(Fraction(1, anchors[i])))
        for vals in classes.values():
            cand = Subatom(out[i].family, frozenset(vals))
            if geq(cand.nor(), target, budget) is True:
                if best is None or len(vals) > len(best[1]):
                    best = (cand, vals)
        if best is None:
            raise PreconditionError(
                f"no color class at slot {i} certifies the 1/{anchors[i]} "
                "drop; the family is not strongly big at this size")
        out[i] = best[0]
        shrunk[i] = tuple(sorted(best[0].poss, key=poss_sort_key))

    color = coloring(*[ch[0] for ch in shrunk])
    for combo in itertools.product(*shrunk):
        assert coloring(*combo) == color, "coloring not constant"
    return tuple(out), color
