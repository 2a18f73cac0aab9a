"""Subatomic families: construction guards, norms, avoidance, bigness."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from creatures.exactnum import DomainError, EQUAL, GREATER, compare, rat
from creatures.subatoms import (
    EmptySubatom, Subatom, check_bigness, counting_family, hitting_family,
    nn_nor_zero, remove_avoiding, rescale_norm, valueset_family,
)
from creatures.counting import nor_divide

from oracles import brute_min_hitting_set


def vs(index_size=5, b=2, **kw):
    return valueset_family(tuple(range(index_size)), b, **kw)


def test_valueset_norm_at_b_to_b():
    fam = vs()
    x = Subatom(fam, frozenset(range(4)))          # |poss| = b^b = 4
    assert compare(x.nor(), rat(1)) == EQUAL


def test_valueset_singleton_norm_zero():
    fam = vs()
    x = Subatom(fam, frozenset({3}))
    assert compare(x.nor(), rat(0)) == EQUAL


def test_valueset_requirement_certified():
    fam = vs()
    assert fam.requirement_met
    full = Subatom(fam, fam.poss)
    assert compare(full.nor(), rat(fam.b)) == GREATER


def test_valueset_largeness_error_names_minimum():
    with pytest.raises(DomainError) as e:
        valueset_family((0, 1, 2), 2)
    assert "minimal |I| is 5" in str(e.value)
    assert "got 3" in str(e.value)


def test_valueset_relaxed_construction():
    fam = valueset_family((0, 1), 2, enforce_largeness=False)
    assert not fam.requirement_met
    assert len(fam.poss) == 4


def test_hitting_poss_count():
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    # complements of the 2^(|I|-b)-subsets of the cube
    assert len(fam.poss) == 120


def test_hitting_nor_zero_pinned():
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    full = Subatom(fam, fam.poss)
    assert nn_nor_zero(full) == 3
    single = Subatom(fam, frozenset(list(fam.poss)[:1]))
    assert nn_nor_zero(single) == 1


def test_hitting_nor_zero_matches_brute_force():
    fam = hitting_family((0, 1, 2), 2, enforce_largeness=False)
    poss = sorted(fam.poss, key=sorted)
    for k in (1, 2, 4):
        for pick in itertools.islice(itertools.combinations(poss, k), 12):
            x = Subatom(fam, frozenset(pick))
            assert nn_nor_zero(x) == brute_min_hitting_set([set(p) for p in pick])


def test_remove_avoiding_identity():
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    full = Subatom(fam, fam.poss)
    same = remove_avoiding(full, frozenset())
    assert same.poss == full.poss


def test_remove_avoiding_single_point_drop():
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    full = Subatom(fam, fam.poss)
    before = nn_nor_zero(full)
    trimmed = remove_avoiding(full, frozenset({0}))
    assert nn_nor_zero(trimmed) >= before - 1


def test_remove_avoiding_everything_empties():
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    full = Subatom(fam, fam.poss)
    with pytest.raises(EmptySubatom):
        remove_avoiding(full, frozenset(range(16)))


def test_remove_avoiding_union_of_witnesses():
    # hitting number after avoidance recovers within |E|
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    full = Subatom(fam, fam.poss)
    n0 = nn_nor_zero(full)
    for e in (frozenset({1}), frozenset({1, 2}), frozenset({0, 5, 9})):
        try:
            out = remove_avoiding(full, e)
        except EmptySubatom:
            continue
        assert nn_nor_zero(out) + len(e) >= n0


def test_counting_norm_depends_on_size_only():
    fam = counting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    poss = sorted(fam.poss, key=sorted)
    a = Subatom(fam, frozenset(poss[:7]))
    b = Subatom(fam, frozenset(poss[50:57]))
    assert compare(a.nor(), b.nor()) == EQUAL


def test_counting_nor_component_pinned():
    # the floored-quotient component at the full family size
    fam = counting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    assert len(fam.poss) == 120
    assert nor_divide(4, 3, 120) == 4
    full = Subatom(fam, fam.poss)
    # combined norm: lognor(120)/(2^min(I) * b^2) = 1/9
    assert compare(full.nor(), rat(1, 9)) == EQUAL
    assert not fam.requirement_met


def test_counting_family_guards():
    with pytest.raises(DomainError):
        counting_family((0, 1, 2, 3), 2, enforce_largeness=False)  # b > 2 required
    with pytest.raises(DomainError):
        counting_family((0, 1, 2), 3, enforce_largeness=False)     # |I| > b required


def test_check_bigness_exhaustive_small_cubes():
    # every coloring of every member splits off a class losing < 1 norm
    for isz, b in ((2, 2), (3, 2), (3, 3)):
        fam = valueset_family(tuple(range(isz)), b, enforce_largeness=False)
        verdict = check_bigness(fam, colors=b, mode="strong")
        assert verdict.passed, (isz, b, verdict.counterexamples[:3])
        assert verdict.exhaustive


def test_check_bigness_exhaustive_mode():
    fam = valueset_family((0, 1), 2, enforce_largeness=False)
    verdict = check_bigness(fam, colors=2, mode="exhaustive")
    assert verdict.passed and verdict.exhaustive


def test_check_bigness_budget_degrades_to_sampling():
    fam = valueset_family((0, 1, 2), 2, enforce_largeness=False)
    verdict = check_bigness(fam, colors=2, mode="strong", work_budget=50)
    assert not verdict.exhaustive
    assert verdict.passed


def test_rescale_requires_verified_bigness():
    fam = valueset_family((0, 1), 2, enforce_largeness=False)
    with pytest.raises(DomainError):
        rescale_norm(fam, 3)
    scaled = rescale_norm(fam, 3, bigness_verified=True)
    x = Subatom(scaled, frozenset(range(4)))
    assert compare(x.nor(), rat(1, 3)) == EQUAL


@given(st.integers(0, 14))
@settings(max_examples=40, deadline=None)
def test_hitting_avoidance_drop_random(seed):
    import random
    rng = random.Random(seed)
    fam = hitting_family((0, 1, 2, 3), 3, enforce_largeness=False)
    pick = frozenset(rng.sample(sorted(fam.poss, key=sorted),
                                rng.randint(4, 40)))
    x = Subatom(fam, pick)
    n0 = nn_nor_zero(x)
    avoid = frozenset(rng.sample(range(16), rng.randint(1, 3)))
    try:
        out = remove_avoiding(x, avoid)
    except EmptySubatom:
        return
    assert out.poss <= x.poss
    assert nn_nor_zero(out) >= n0 - len(avoid)
