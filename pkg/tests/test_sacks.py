import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creatures.exactnum import DomainError, Size
from creatures.sacks import (
    BudgetExceeded, Column, FiniteTree, column_cube, column_product,
    fat_nodes, homogenize_columns, measure_hypothesis_holds, nor_sacks,
    prune_column, prune_to_split, ramsey_bound, relative_measure,
    splitting_embeds, splitting_size,
)


def rand_column(rng, width=4):
    w = rng.randint(1, width)
    k = rng.randint(1, 1 << w)
    return Column(tuple(range(w)), frozenset(rng.sample(range(1 << w), k)))


def test_splitting_size_full_cube():
    for w in range(1, 7):
        assert splitting_size(column_cube(range(w))) == w


def test_splitting_size_singleton():
    assert splitting_size(Column((0, 1, 2), frozenset({0b101}))) == 0


def test_splitting_size_three_branch():
    c = Column((0, 1), frozenset({0b00, 0b10, 0b01}))
    assert splitting_size(c) == 1


def test_splitting_size_against_embedding_oracle():
    rng = random.Random(11)
    for _ in range(300):
        col = rand_column(rng)
        if len(col.branches) > 16:
            continue
        s = splitting_size(col)
        assert splitting_embeds(col, s)
        assert not splitting_embeds(col, s + 1)


def test_ramsey_base_cases():
    for n in range(0, 6):
        for c in range(1, 5):
            assert ramsey_bound(1, n, c).cmp(n * c) == 0 or c == 1
    for j in (1, 2, 3):
        for n in (0, 1, 7):
            assert ramsey_bound(j, n, 1).cmp(n) == 0


def test_ramsey_pinned():
    assert ramsey_bound(2, 1, 2).cmp(16) == 0
    big = ramsey_bound(3, 1, 2)
    assert big.is_tower
    assert big.cmp(1 << 62) > 0


def test_ramsey_rejects_zero_width():
    with pytest.raises(DomainError):
        ramsey_bound(0, 1, 2)


def test_ramsey_monotone_small_grid():
    for j in (1, 2):
        for n in (1, 2):
            for c in (2, 3):
                base = ramsey_bound(j, n, c)
                assert ramsey_bound(j + 1, n, c).cmp(base) >= 0
                assert ramsey_bound(j, n + 1, c).cmp(base) >= 0
                assert ramsey_bound(j, n, c + 1).cmp(base) >= 0


def test_nor_sacks_pinned():
    assert nor_sacks(prune_to_split(column_cube(range(5)), 3), 2, 1) == 1
    assert nor_sacks(prune_to_split(column_cube(range(5)), 4), 2, 1) == 2
    assert nor_sacks(Column((0,), frozenset({0})), 2, 1) == 0


def test_nor_sacks_guards():
    col = column_cube(range(2))
    with pytest.raises(DomainError):
        nor_sacks(col, 2, 0)
    with pytest.raises(DomainError):
        nor_sacks(col, 2, 1, width_fn=lambda m: 0)


def test_nor_sacks_antitone():
    rng = random.Random(5)
    for _ in range(200):
        col = rand_column(rng, width=6)
        sub_branches = frozenset(
            b for b in col.branches if rng.random() < 0.7) or col.branches
        sub = Column(col.interval, sub_branches)
        for B, Bp in ((2, 2), (2, 3)):
            for m, mp in ((1, 1), (1, 2)):
                assert nor_sacks(sub, Bp, mp) <= nor_sacks(col, B, m)


def test_product_counts_and_split():
    a, b = column_cube(range(0, 2)), column_cube(range(2, 5))
    p = column_product(a, b)
    assert len(p.branches) == len(a.branches) * len(b.branches)
    assert splitting_size(p) == 5
    assert p.interval == (0, 1, 2, 3, 4)


def test_product_needs_stacked_intervals():
    with pytest.raises(DomainError):
        column_product(column_cube(range(2, 5)), column_cube(range(0, 2)))


def test_product_with_singleton_preserves_split():
    rng = random.Random(3)
    for _ in range(50):
        a = rand_column(rng)
        lo = max(a.interval) + 1
        b = Column((lo, lo + 1), frozenset({0b10}))
        p = column_product(a, b)
        assert splitting_size(p) == splitting_size(a)


def test_product_norm_dominates_factors():
    rng = random.Random(9)
    for _ in range(100):
        a = rand_column(rng, width=4)
        shift = max(a.interval) + 1
        b0 = rand_column(rng, width=4)
        b = Column(tuple(i + shift for i in b0.interval), b0.branches)
        p = column_product(a, b)
        want = max(nor_sacks(a, 2, 1), nor_sacks(b, 2, 1))
        assert nor_sacks(p, 2, 1) >= want


def test_prune_column_full_cube():
    s = column_cube(range(6))
    out = prune_column(s, 3)
    assert len(out.branches) == 8
    assert splitting_size(out) == 3
    assert out.branches <= s.branches


def test_prune_column_small_split_preserved():
    c = Column((0, 1, 2), frozenset({0b000, 0b001, 0b010}))
    s = splitting_size(c)
    out = prune_column(c, 3)
    assert splitting_size(out) == s


def test_prune_column_bounds():
    rng = random.Random(21)
    for _ in range(100):
        col = rand_column(rng, width=6)
        lead = rng.randint(0, col.width())
        out = prune_column(col, lead)
        assert out.branches <= col.branches
        assert len(out.branches) <= 1 << lead
        assert splitting_size(out) == min(splitting_size(col), lead)


def test_homogenize_single_column_all_colorings():
    # 2 colors on the 2x2 cube: every one of the 16 colorings homogenizes
    col = column_cube(range(2))
    for bits in range(16):
        coloring = lambda b: (bits >> b) & 1
        subs, color = homogenize_columns([col], coloring, 1, 2)
        assert splitting_size(subs[0]) >= 1
        assert all(coloring(b) == color for b in subs[0].branches)


def test_homogenize_three_colors_all_colorings():
    col = column_cube(range(3))
    for paint in itertools.product(range(3), repeat=8):
        subs, color = homogenize_columns([col], lambda b: paint[b], 1, 3)
        assert splitting_size(subs[0]) >= 1
        assert all(paint[b] == color for b in subs[0].branches)


def test_homogenize_constant_coloring_returns_inputs():
    cols = [column_cube(range(2))]
    subs, color = homogenize_columns(cols, lambda b: 4, 1, 1)
    assert subs == cols
    assert color == 4


def test_homogenize_threshold_guard():
    with pytest.raises(DomainError):
        homogenize_columns([column_cube(range(3))], lambda b: 0, 2, 2)


def test_homogenize_budget_guard():
    a = column_cube(range(16))
    b = column_cube(range(16, 32))
    with pytest.raises(BudgetExceeded):
        homogenize_columns([a, b], lambda x, y: 0, 1, 2, work_budget=10)


def test_homogenize_two_columns():
    a = column_cube(range(16))
    b = column_cube(range(16, 32))
    pick = lambda x, y: (bin(x).count("1") + bin(y).count("1")) & 1
    subs, color = homogenize_columns([a, b], pick, 1, 2, work_budget=10_000_000)
    assert all(splitting_size(s) >= 1 for s in subs)
    for x in subs[0].branches:
        for y in subs[1].branches:
            assert pick(x, y) == color


def test_column_bigness_small():
    # norm >= n+1 in, norm >= n out, exhaustively over colorings
    for n in (0, 1):
        need = 1 << (n + 1)           # F(n+1) for B=2, m=1
        col = column_cube(range(need))
        for bits in range(1 << min(len(col.branches), 16)):
            coloring = lambda b: (bits >> b) & 1
            subs, _color = homogenize_columns([col], coloring, 1 << n, 2)
            assert nor_sacks(subs[0], 2, 1) >= n


# --- finite trees -----------------------------------------------------------

def test_relative_measure_examples():
    full = FiniteTree(2, frozenset(range(4)))
    assert relative_measure(full, 0, 0) == 1
    three = FiniteTree(2, frozenset({0, 1, 2}))
    assert relative_measure(three, 0, 0) == Fraction(3, 4)
    sparse = FiniteTree(2, frozenset({0}))
    assert relative_measure(sparse, 1, 1) == 0


def test_relative_measure_martingale():
    rng = random.Random(2)
    for _ in range(60):
        d = rng.randint(1, 6)
        leaves = frozenset(rng.sample(range(1 << d), rng.randint(1, 1 << d)))
        t = FiniteTree(d, leaves)
        for m in range(d):
            for node in range(1 << m):
                kids = (relative_measure(t, m + 1, node)
                        + relative_measure(t, m + 1, node | (1 << m)))
                assert relative_measure(t, m, node) == Fraction(kids, 2)


def test_splitting_size_of_tree():
    t = FiniteTree(3, frozenset({0b000, 0b100, 0b010, 0b110, 0b001}))
    assert splitting_size(t) == 2


def test_fat_nodes_full_tree():
    t = FiniteTree(4, frozenset(range(16)))
    fat, v = fat_nodes(t, 2, Fraction(1, 4))
    assert v["hypothesis_holds"] and v["bound_holds"]
    assert fat == t.level(2)


def test_fat_nodes_eps_one_trivial():
    t = FiniteTree(3, frozenset({0, 1, 5}))
    fat, v = fat_nodes(t, 1, 1)
    assert v["bound_holds"]
    assert fat == t.level(1)


def test_fat_nodes_failed_hypothesis_is_reported():
    t = FiniteTree(4, frozenset(range(8)) | {8})
    _fat, v = fat_nodes(t, 1, Fraction(1, 4))
    assert v["hypothesis_holds"] is False


def test_fat_nodes_random_dense_trees():
    rng = random.Random(13)
    found = 0
    while found < 40:
        d = rng.randint(2, 12)
        n_leaves = rng.randint((1 << d) // 2, 1 << d)
        t = FiniteTree(d, frozenset(rng.sample(range(1 << d), n_leaves)))
        m = rng.randint(1, d)
        if not measure_hypothesis_holds(t, m, Fraction(1, 4)):
            continue
        found += 1
        _fat, v = fat_nodes(t, m, Fraction(1, 4))
        assert v["bound_holds"]
