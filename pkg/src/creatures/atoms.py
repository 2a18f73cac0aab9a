"""Atomic creatures: a level, an index set, and one subatom per index.

The atom's norm balances two quantities: how many indices a witness set
keeps (measured on a base-3 log scale damped by the level) and the worst
component norm inside the witness. Disjointification splits overlapping
witness index sets while losing at most 1 of measure per set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

from .exactnum import (BudgetExceeded, DomainError, EQUAL, GREATER, LESS,
                       UNDECIDED, NormValue, compare, logq, nmin, rat)
from .subatoms import Subatom


@dataclass(frozen=True)
class Atom:
    level: int
    components: tuple[Subatom, ...]

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("atom level must be a natural number")
        if not self.components:
            raise DomainError("atom needs a nonempty index set")

    def size(self) -> int:
        return len(self.components)


def index_measure(level: int, size: int) -> NormValue:
    """log_3 of an index-set size, damped by level+1; empty and singleton
    sets measure 0."""
    if level < 0 or size < 0:
        raise DomainError("index_measure needs naturals")
    if size <= 1:
        return rat(0)
    return logq(3, size, level + 1)


_SIGN = {LESS: -1, EQUAL: 0, GREATER: 1}


def _cmp_or_raise(a: NormValue, b: NormValue, budget: int) -> int:
    c = compare(a, b, budget)
    if c == UNDECIDED:
        raise BudgetExceeded("norm comparison undecided within budget")
    return _SIGN[c]


def atom_norm(atom: Atom, budget: int = 1 << 12,
              widest: bool = False) -> tuple[NormValue, frozenset]:
    """Best min(measure of witness, worst norm inside witness) over witness
    index sets, with the witness realizing it.

    For a witness of size k the optimum keeps the k largest component
    norms, so scanning prefixes of the norm-sorted index list suffices.
    Returns the smallest witness among maximizers, or the largest with
    `widest` (big witnesses survive disjointification better).

    Components are grouped by identity first; large atoms coming out of
    compound grids repeat a handful of distinct subatoms thousands of
    times, and each distinct norm is compared only once.
    """
    groups: dict = {}
    for i, comp in enumerate(atom.components):
        groups.setdefault(comp, []).append(i)
    norms = {comp: comp.nor() for comp in groups}

    reps = sorted(groups, key=cmp_to_key(
        lambda a, b: -_cmp_or_raise(norms[a], norms[b], budget)))
    rank = {reps[0]: 0}
    for prev, cur in zip(reps, reps[1:]):
        same = _cmp_or_raise(norms[prev], norms[cur], budget) == 0
        rank[cur] = rank[prev] + (0 if same else 1)

    order = sorted(range(len(atom.components)),
                   key=lambda i: (rank[atom.components[i]], i))

    # Walk rank blocks: within a block the component norm v is constant,
    # so min(measure(k), v) is nondecreasing in k and only the block end
    # (or the first k where the measure reaches v) can improve the best.
    def measure_cmp(k: int, v: NormValue) -> int:
        return _cmp_or_raise(index_measure(atom.level, k), v, budget)

    best_val: NormValue | None = None
    best_k = 0
    start = 0
    while start < len(order):
        end = start
        block_rank = rank[atom.components[order[start]]]
        while end < len(order) and rank[atom.components[order[end]]] == block_rank:
            end += 1
        v = norms[atom.components[order[start]]]
        if widest or measure_cmp(end, v) <= 0:
            k, cand = end, nmin(index_measure(atom.level, end), v)
        else:
            lo, hi = start + 1, end    # smallest k with measure(k) >= v
            while lo < hi:
                mid = (lo + hi) // 2
                if measure_cmp(mid, v) >= 0:
                    hi = mid
                else:
                    lo = mid + 1
            k, cand = lo, nmin(index_measure(atom.level, lo), v)
        better = _cmp_or_raise(cand, best_val, budget) if best_val is not None else 1
        if better > 0 or (widest and better == 0):
            best_val, best_k = cand, k
        start = end
    assert best_val is not None
    return best_val, frozenset(order[:best_k])


def split_index_sets(level: int, sets) -> list[frozenset]:
    """Pairwise disjoint subsets, each keeping all but 1 of its source's
    measure. Sets at measure <= 1 are emptied outright; every surviving
    pair gives up alternating halves of its intersection.

    Needs len(sets) <= level + 1; a single set is returned unchanged.
    """
    if not sets:
        raise DomainError("need at least one index set")
    if len(sets) - 1 > level:
        raise DomainError("more sets than the level admits")
    sets = [frozenset(s) for s in sets]
    if len(sets) == 1:
        return sets

    small = 3 ** (level + 1)      # measure <= 1 in the integers
    out = [s if len(s) > small else frozenset() for s in sets]
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            shared = out[i] & out[j]
            if not shared:
                continue
            ordered = sorted(shared)
            out[i] = out[i] - frozenset(ordered[1::2])
            out[j] = out[j] - frozenset(ordered[0::2])

    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert not out[i] & out[j]
    for src, kept in zip(sets, out):
        # measure drop <= 1, i.e. |src| <= 3^(level+1) * |kept|
        if kept:
            assert len(src) <= small * len(kept)
        else:
            assert len(src) <= small
    return out
