"""Columns of binary branches over index intervals: splitting size, the
iterated Ramsey growth function, homogenization, products, pruning, and
relative-measure bookkeeping on finite binary trees.

Branches are ints; bit k of a branch is its value at the k-th smallest
index of the column's interval.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .exactnum import BudgetExceeded, DomainError, Size


@dataclass(frozen=True)
class Column:
    interval: tuple[int, ...]
    branches: frozenset[int]

    def __post_init__(self):
        if not self.branches:
            raise DomainError("column needs at least one branch")
        top = 1 << len(self.interval)
        if any(b < 0 or b >= top for b in self.branches):
            raise DomainError("branch outside the column's interval")

    def width(self) -> int:
        return len(self.interval)

    def slice_bits(self, lo: int, hi: int) -> frozenset[int]:
        """Branch restrictions to interval positions [lo, hi)."""
        mask = (1 << (hi - lo)) - 1
        return frozenset((b >> lo) & mask for b in self.branches)


def column_cube(interval: Iterable[int]) -> Column:
    iv = tuple(sorted(interval))
    return Column(iv, frozenset(range(1 << len(iv))))


def _split(branches: frozenset[int], nbits: int) -> int:
    if nbits == 0 or len(branches) == 1:
        return 0
    sub0 = frozenset(b >> 1 for b in branches if not b & 1)
    sub1 = frozenset(b >> 1 for b in branches if b & 1)
    if not sub0:
        return _split(sub1, nbits - 1)
    if not sub1:
        return _split(sub0, nbits - 1)
    s0, s1 = _split(sub0, nbits - 1), _split(sub1, nbits - 1)
    m = max(s0, s1)
    return m + 1 if s0 == s1 else m


def splitting_size(column) -> int:
    """Depth of the largest full binary splitting cascade in the branch
    (or leaf) set's restriction tree. Accepts a Column or a FiniteTree."""
    if isinstance(column, FiniteTree):
        return _split(column.leaves, column.depth)
    return _split(column.branches, column.width())


def splitting_embeds(column: Column, n: int) -> bool:
    """Brute-force oracle: a full depth-n splitting tree embeds.

    Exponential; intended for cross-checking splitting_size on small columns.
    """
    def embeds(branches: frozenset[int], nbits: int, k: int) -> bool:
        if k == 0:
            return bool(branches)
        if nbits == 0 or len(branches) < 2:
            return False
        sub0 = frozenset(b >> 1 for b in branches if not b & 1)
        sub1 = frozenset(b >> 1 for b in branches if b & 1)
        if sub0 and sub1 and embeds(sub0, nbits - 1, k - 1) and embeds(sub1, nbits - 1, k - 1):
            return True
        return ((bool(sub0) and embeds(sub0, nbits - 1, k))
                or (bool(sub1) and embeds(sub1, nbits - 1, k)))

    return embeds(column.branches, column.width(), n)


def ramsey_bound(j: int, n: int, c: int) -> Size:
    """Growth function for iterated column Ramsey arguments:
    f(1,n,c) = n*c and f(j+1,n,c) = n * c^(2^(j*f(j,n,c)))."""
    if j < 1 or n < 0 or c < 1:
        raise DomainError("ramsey_bound needs j >= 1, n >= 0, c >= 1")
    if c == 1:
        return Size.of(n)
    f = Size.of(n * c)
    for step in range(1, j):
        f = Size.power(c, Size.two_to(f.mul(step)), mult=n)
    return f


def nor_sacks(column: Column, colors: int, m: int,
              width_fn: Callable[[int], int] = lambda m: m) -> int:
    """Largest n whose iterated Ramsey threshold fits under the splitting
    size: F(0) = 1, F(n+1) = ramsey_bound(width_fn(m), F(n), colors)."""
    if m < 1 or colors < 2:
        raise DomainError("nor_sacks needs m >= 1 and colors >= 2")
    w = width_fn(m)
    if w < 1:
        raise DomainError("width function must be positive at m")
    sp = splitting_size(column)
    n, f = 0, Size.of(1)
    while not f.is_tower and f.n <= sp:
        n += 1
        f = ramsey_bound(w, f.n, colors)
    return max(n - 1, 0)


def column_product(a: Column, b: Column) -> Column:
    if not a.interval or not b.interval or min(b.interval) != max(a.interval) + 1:
        raise DomainError("product needs consecutive intervals")
    k = a.width()
    branches = frozenset(x | (y << k) for x in a.branches for y in b.branches)
    return Column(a.interval + b.interval, branches)


def _carve(branches: frozenset[int], nbits: int, r: int) -> frozenset[int]:
    """2^r branches realizing splitting size exactly r, downward closed as
    a prefix tree: embed the full tree, then extend each tip lex-least."""
    if r == 0:
        return frozenset({min(branches)})
    sub0 = frozenset(b >> 1 for b in branches if not b & 1)
    sub1 = frozenset(b >> 1 for b in branches if b & 1)
    if sub0 and sub1 and _split(sub0, nbits - 1) >= r - 1 and _split(sub1, nbits - 1) >= r - 1:
        left = _carve(sub0, nbits - 1, r - 1)
        right = _carve(sub1, nbits - 1, r - 1)
        return frozenset(x << 1 for x in left) | frozenset((x << 1) | 1 for x in right)
    # descend along the child that still splits enough
    if sub0 and _split(sub0, nbits - 1) >= r:
        return frozenset(x << 1 for x in _carve(sub0, nbits - 1, r))
    if sub1 and _split(sub1, nbits - 1) >= r:
        return frozenset((x << 1) | 1 for x in _carve(sub1, nbits - 1, r))
    raise AssertionError("splitting size underestimated during carve")


def prune_to_split(column: Column, r: int) -> Column:
    sp = splitting_size(column)
    r = min(r, sp)
    out = Column(column.interval, _carve(column.branches, column.width(), r))
    assert len(out.branches) == 1 << r
    assert splitting_size(out) == r
    assert out.branches <= column.branches
    return out


def prune_column(column: Column, lead_size: int) -> Column:
    """Thin out to at most 2^lead_size branches while keeping splitting
    size min(split, lead_size); lead_size is the width of the column's
    leading index block."""
    if lead_size < 0 or lead_size > column.width():
        raise DomainError("leading block exceeds the column")
    return prune_to_split(column, lead_size)


def homogenize_columns(columns: Sequence[Column],
                       coloring: Callable[..., int],
                       n: int, colors: int,
                       work_budget: int = 5_000_000
                       ) -> tuple[list[Column], int]:
    """Sub-columns of splitting size >= n on which the coloring of branch
    tuples is constant. Needs splitting size >= ramsey_bound(j, n, colors)
    on every input column (j = number of columns).

    The single-column case is a plain color-class argument and is always
    exhaustive; more columns go through pruning plus function-coloring and
    are guarded by work_budget.
    """
    j = len(columns)
    if j < 1:
        raise DomainError("no columns to homogenize")
    need = ramsey_bound(j, n, colors)
    for col in columns:
        if need.is_tower or need.n > splitting_size(col):
            raise DomainError("splitting size below the Ramsey threshold")
    if colors == 1:
        # constant coloring: nothing to shrink
        return list(columns), coloring(*(min(c.branches) for c in columns))

    if j == 1:
        col = columns[0]
        if len(col.branches) > work_budget:
            raise BudgetExceeded("too many branches to color exhaustively")
        classes: dict[int, set[int]] = {}
        for b in col.branches:
            classes.setdefault(coloring(b), set()).add(b)
        best_color = max(classes,
                         key=lambda c: (_split(frozenset(classes[c]), col.width()), -c))
        sub = Column(col.interval, frozenset(classes[best_color]))
        assert splitting_size(sub) >= n
        return [sub], best_color

    inner = ramsey_bound(j - 1, n, colors)
    assert not inner.is_tower
    pruned = [prune_to_split(c, inner.n) for c in columns[:-1]]
    tuples = sorted(itertools.product(*(sorted(c.branches) for c in pruned)))
    last = columns[-1]
    if len(tuples) * len(last.branches) > work_budget:
        raise BudgetExceeded("function-coloring table exceeds the budget")

    table: dict[int, tuple] = {
        b: tuple(coloring(*t, b) for t in tuples) for b in last.branches}
    keys = sorted(set(table.values()))
    key_id = {k: i for i, k in enumerate(keys)}
    [sub_last], picked = homogenize_columns(
        [last], lambda b: key_id[table[b]], n, len(keys), work_budget)
    fixed = keys[picked]
    lookup = {t: fixed[i] for i, t in enumerate(tuples)}
    subs, color = homogenize_columns(
        pruned, lambda *t: lookup[t], n, colors, work_budget)
    out = subs + [sub_last]
    for c in out:
        assert splitting_size(c) >= n
    sample_colors = {coloring(*t)
                     for t in itertools.islice(
                         itertools.product(*(sorted(c.branches) for c in out)), 2048)}
    assert sample_colors == {color}
    return out, color


# ---------------------------------------------------------------------------
# Finite binary trees, relative measure, fat nodes.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteTree:
    depth: int
    leaves: frozenset[int]

    def __post_init__(self):
        if self.depth < 0 or not self.leaves:
            raise DomainError("tree needs depth >= 0 and at least one leaf")
        if any(v < 0 or v >= 1 << self.depth for v in self.leaves):
            raise DomainError("leaf outside 2^depth")

    def level(self, m: int) -> frozenset[int]:
        if m < 0 or m > self.depth:
            raise DomainError("level outside the tree")
        return frozenset(v & ((1 << m) - 1) for v in self.leaves)

    def leaves_below(self, m: int, node: int) -> int:
        mask = (1 << m) - 1
        return sum(1 for v in self.leaves if v & mask == node)

    def density(self) -> Fraction:
        return Fraction(len(self.leaves), 1 << self.depth)


def relative_measure(tree: FiniteTree, m: int, node: int) -> Fraction:
    """Leaf mass below a level-m node, renormalized to that node's cylinder;
    0 for nodes outside the tree."""
    if m < 0 or m > tree.depth or node < 0 or node >= 1 << m:
        raise DomainError("node outside 2^m")
    cnt = tree.leaves_below(m, node)
    return Fraction(cnt, 1 << (tree.depth - m))


def measure_hypothesis_holds(tree: FiniteTree, m: int, eps: Fraction) -> bool:
    """Level-m node count is within an eps^2 slack of the leaf density:
    |T cap 2^m| * 2^-m - mu*eps^2 <= mu."""
    mu = tree.density()
    return Fraction(len(tree.level(m)), 1 << m) - mu * eps * eps <= mu


def fat_nodes(tree: FiniteTree, m: int, eps) -> tuple[frozenset[int], dict]:
    """Level-m nodes keeping at least a (1-eps) share of their cylinder's
    leaf mass. Under the measure hypothesis these are most of the level:
    count >= (1-eps) * |T cap 2^m|, certified exactly in the verdict.

    A failed hypothesis is reported in the verdict, not raised; the bound
    is only asserted when the hypothesis holds.
    """
    eps = Fraction(eps)
    if not (0 < eps <= 1):
        raise DomainError("eps must be in (0,1]")
    hyp = measure_hypothesis_holds(tree, m, eps)
    level = tree.level(m)
    fat = frozenset(s for s in level
                    if relative_measure(tree, m, s) >= 1 - eps)
    bound_ok = len(fat) >= (1 - eps) * len(level)
    verdict = {
        "hypothesis_holds": hyp,
        "level_count": len(level),
        "fat_count": len(fat),
        "required": (1 - eps) * len(level),
        "bound_holds": bound_ok,
    }
    if hyp:
        assert bound_ok
    return fat, verdict
