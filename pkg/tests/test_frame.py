import random

import pytest

from creatures.exactnum import DomainError, Size
from creatures.frame import (ToyFrame, cascade_table, cut_points, decode,
                             encode, format_table, value_at)
from creatures.subatoms import hitting_family, valueset_family


# ---------------------------------------------------------------------------
# Parameter cascade
# ---------------------------------------------------------------------------

def table():
    if not hasattr(table, "cached"):
        table.cached = cascade_table()
    return table.cached


def test_cascade_column_row_initial_values():
    row = table().row(0, -1)
    assert (row.maxposs_below.n, row.maxposs_below.exact) == (1, True)
    assert (row.big.n, row.big.exact) == (2, True)
    assert row.interval == (0, 1)
    assert row.sublevel_count.n == 3          # one-step width profile
    assert row.norm_target.n == 1             # 2^(level * maxposs) at 0
    assert row.exact


def test_cascade_height_seed_raised_for_strictness():
    t = table()
    assert t.h_seed_declared == 3
    assert t.h_seed_used == 4
    assert t.row(0, -1).h_below.n == 4
    assert any("raised" in n for n in t.row(0, -1).notes)


def test_cascade_slot_measure_identity_check():
    checks = {c.name: c for c in table().checks}
    c = checks["graded-slot count measures exactly the possibility power"]
    assert c.passed is True


def test_cascade_first_graded_row_exact_values():
    row = table().row(0, 0)
    assert row.h_below.n == 5
    assert row.maxposs_below.n == 1
    assert row.big.n == 32                    # 2^(5 * 1)
    assert row.anchor.n == 32                 # first graded slot: anchor = colors
    vs, nf, cn = row.families
    assert (vs.kind, vs.interval, vs.size_exact) == ("valueset", (1, 5122), True)
    assert vs.threshold.n == 2 ** 5122
    assert (nf.kind, nf.interval, nf.size_exact) == ("hitting", (5122, 10274), True)
    assert nf.threshold.n == 10274
    assert (cn.kind, cn.start, cn.size, cn.size_exact) == ("counting", 10274, 33, False)
    assert not cn.threshold.exact
    assert cn.threshold.base == 2
    assert cn.threshold.exp.n == 2 ** 65 - 2 ** 32   # pairs from a 33-bit block
    assert not row.poss_bound.exact
    assert row.poss_bound.exp.n.bit_length() == 5126  # 2^(2^5125) lower bound


def test_cascade_tower_row_is_flagged_lower_bound():
    row = table().row(0, 1)
    assert not row.exact
    for size in (row.h_below, row.maxposs_below, row.big, row.anchor):
        assert not size.exact
    # the anchor recursion stays visible: B * (previous anchor + 1) + 1
    assert row.anchor.mult == 33
    assert any("lower bound" in n for n in row.notes)


def test_cascade_growth_checks_never_fail():
    for c in table().checks:
        assert c.passed is not False, (c.name, c.note)


def test_cascade_monotonicity_certified_where_exact():
    checks = {c.name: c for c in table().checks}
    assert checks["color counts nondecreasing"].passed is True
    assert checks["possibility bounds nondecreasing"].passed is True
    assert checks["anchors strictly increasing across graded rows"].passed is True


def test_cascade_budget_truncation_is_flagged():
    assert table().partial is False
    assert cascade_table(up_to=(0, 2)).partial is True


def test_cascade_wider_profile_changes_slot_count():
    t = cascade_table(width_of=lambda m: 2 * m)
    assert t.row(0, -1).sublevel_count.n == 3 ** 2
    with pytest.raises(DomainError):
        cascade_table(width_of=lambda m: m + 1)   # must start at width 0


def test_format_table_mentions_every_row_and_no_failures():
    text = format_table(table())
    assert "(0,-1)" in text or "level 0" in text
    assert "FAIL" not in text
    assert "pass" in text


# ---------------------------------------------------------------------------
# Toy frames
# ---------------------------------------------------------------------------

TVS = valueset_family(range(2), 2, enforce_largeness=False)
THT = hitting_family(range(2), 2, enforce_largeness=False)


def test_toy_frame_tables_and_blocks():
    f = ToyFrame(widths=[0, 1, 1], poss_caps=[1, 2, 4], colors=[2, 2, 2],
                 bits=[2, 3, 2], sublevel_counts=[1, 2, 2],
                 families={"valueset": TVS, "hitting": THT})
    assert f.height == 3
    assert f.sacks_interval(0) == (0, 1)
    assert f.sacks_interval(1) == (2, 3, 4)
    assert f.sacks_interval(2) == (5, 6)
    assert f.maxwidth(2) == 1 and f.colors(1) == 2 and f.sublevels(2) == 2
    with pytest.raises(DomainError):
        f.sacks_interval(3)


def test_toy_frame_requirements_report_honestly():
    good = ToyFrame.uniform(3, poss_cap=1, colors=4, bits=2, sublevels=2,
                            families={"valueset": TVS, "hitting": THT})
    report = {r.name: r.passed for r in good.requirements()}
    assert report["colors nondecreasing"] is True
    assert report["widths stay under their level"] is True
    # the toy families are far too small for their anchors to cover caps
    fat_caps = ToyFrame.uniform(3, poss_cap=64, colors=2, bits=2, sublevels=2,
                                families={"valueset": TVS, "hitting": THT})
    report = {r.name: r.passed for r in fat_caps.requirements()}
    assert report["valueset anchor covers twice every possibility cap"] is False


def test_toy_frame_rejects_degenerate_tables():
    with pytest.raises(DomainError):
        ToyFrame(widths=[0], poss_caps=[1], colors=[1], bits=[1],
                 sublevel_counts=[1], families={})
    with pytest.raises(DomainError):
        ToyFrame(widths=[0, 1], poss_caps=[1], colors=[2, 2], bits=[1, 1],
                 sublevel_counts=[1, 1], families={})


# ---------------------------------------------------------------------------
# Block coding of bounded sequences
# ---------------------------------------------------------------------------

def test_cut_points_prefix_sums():
    assert cut_points(()) == (0,)
    assert cut_points((0,)) == (0, 1)
    assert cut_points((2, 0, 1)) == (0, 3, 4, 6)


def test_encode_pinned_example():
    assert encode((1, 0), (1, 1)) == (0, 1, 1, 0)


def test_encode_zero_sequence_marks_block_starts():
    g = (2, 1, 3)
    bits = encode((0, 0, 0), g)
    cuts = cut_points(g)
    assert all(bits[c] == 1 for c in cuts[:-1])
    assert sum(bits) == 3


def test_encode_rejects_escaping_entries():
    with pytest.raises(DomainError):
        encode((2,), (1,))
    with pytest.raises(DomainError):
        encode((0, 0), (1,))


def test_decode_rejects_malformed_strings():
    with pytest.raises(DomainError):
        decode((0, 1, 1), (1, 1))          # not a block boundary
    with pytest.raises(DomainError):
        decode((1, 1, 0, 1), (1, 1))       # two marks in block 0
    with pytest.raises(DomainError):
        decode((0, 0, 1, 0), (1, 1))       # no mark in block 0
    with pytest.raises(DomainError):
        decode((0, 2, 1, 0), (1, 1))       # not binary


def test_round_trip_random():
    rng = random.Random(4101)
    for _ in range(10_000):
        g = tuple(rng.randrange(4) for _ in range(rng.randrange(1, 8)))
        f = tuple(rng.randrange(b + 1) for b in g)
        bits = encode(f, g)
        assert decode(bits, g) == f
        # exactly one mark per block
        cuts = cut_points(g)
        for lo, hi in zip(cuts, cuts[1:]):
            assert sum(bits[lo:hi]) == 1


def test_partial_prefix_decodes_as_prefix():
    g = (1, 2, 1)
    bits = encode((1, 0), g[:2])
    assert decode(bits, g) == (1, 0)
    assert value_at(bits, g, 1) == 0
    with pytest.raises(DomainError):
        value_at(bits, g, 2)
