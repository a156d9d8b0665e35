import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorqc.construction import (MAX_DEPTH, build_levels, check_gap_bound, gap_creation_levels,
                                   gap_length, interval_length, log_interval_length)
from cantorqc.sequences import GapSequence


def subdivide_exact(qs, k_max):
    """Oracle: exact rational subdivision by endpoint arithmetic."""
    levels = [[(Fraction(0), Fraction(1))]]
    gaps = [[]]
    for k in range(1, k_max + 1):
        q = qs[k - 1]
        ivs, gps = [], []
        prev_gaps = gaps[-1]
        for idx, (a, b) in enumerate(levels[-1]):
            L = b - a
            cut = (1 - q) * L / 2
            ivs += [(a, a + cut), (b - cut, b)]
            gps.append((a + cut, b - cut))
            if idx < len(prev_gaps):
                gps.append(prev_gaps[idx])
        levels.append(ivs)
        gaps.append(sorted(gps))
    return levels, gaps


def test_level_one_middle_third():
    lv = build_levels(GapSequence.constant(Fraction(1, 3)), 1)
    lefts, length = lv.intervals(1)
    assert np.allclose(lefts, [0, 2 / 3], atol=1e-16) and length == pytest.approx(1 / 3, abs=1e-16)
    gl, glen = lv.gaps(1)
    assert gl[0] == pytest.approx(1 / 3) and glen[0] == pytest.approx(1 / 3)


@pytest.mark.parametrize("q,k,expected", [(Fraction(1, 3), 4, 1 / 81), (Fraction(1, 2), 2, 1 / 16),
                                          (Fraction(1, 3), 3, 1 / 27)])
def test_lengths_against_subdivision(q, k, expected):
    seq = GapSequence.constant(q)
    levels, _ = subdivide_exact([q] * k, k)
    a, b = levels[k][0]
    assert float(b - a) == pytest.approx(expected, rel=1e-15)
    assert interval_length(seq, k) == pytest.approx(expected, rel=1e-15)
    assert build_levels(seq, k).lengths[k] == pytest.approx(expected, rel=1e-15)


def test_interval_length_examples():
    assert interval_length(GapSequence.geometric(0.5), 2) == pytest.approx(0.09375, rel=1e-15)
    assert interval_length(GapSequence.constant(0.7), 0) == 1.0


def test_gap_length_examples():
    c3 = GapSequence.constant(Fraction(1, 3))
    assert gap_length(c3, 1, 1) == pytest.approx(1 / 3)
    assert gap_length(c3, 2, 2) == pytest.approx(1 / 3)
    assert gap_length(GapSequence.constant(0.5), 3, 3) == pytest.approx(0.03125)
    with pytest.raises(IndexError):
        gap_length(c3, 2, 4)


def test_gap_creation_levels():
    assert list(gap_creation_levels(3)) == [3, 2, 3, 1, 3, 2, 3]


def test_full_geometry_matches_exact_oracle():
    qs = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 5), Fraction(3, 7), Fraction(1, 4)]
    seq = GapSequence.explicit(qs)
    lv = build_levels(seq, 5)
    levels, gaps = subdivide_exact(qs, 5)
    for k in range(6):
        lefts, length = lv.intervals(k)
        assert np.allclose(lefts, [float(a) for a, _ in levels[k]], rtol=0, atol=1e-15)
        assert np.allclose(length, [float(b - a) for a, b in levels[k]], rtol=1e-14)
        gl, glen = lv.gaps(k)
        assert np.allclose(gl, [float(a) for a, _ in gaps[k]], atol=1e-15)
        assert np.allclose(glen, [float(b - a) for a, b in gaps[k]], rtol=1e-14)
        for i, (a, b) in enumerate(gaps[k], start=1):
            assert gap_length(seq, k, i) == pytest.approx(float(b - a), rel=1e-14)


def test_closure_and_nesting_invariants():
    lv = build_levels(GapSequence.seeded_uniform(0.1, 0.9, 99), 12)
    assert lv.closure_error() < 1e-12
    for k in range(12):
        lefts, L = lv.intervals(k)
        child, Lc = lv.intervals(k + 1)
        assert np.all(child[0::2] >= lefts - 1e-15)
        assert np.all(child[1::2] + Lc <= lefts + L + 1e-15)
        # removed middle is centred on the parent midpoint with length q_{k+1} |I_k|
        mid_gap = 0.5 * (child[0::2] + Lc + child[1::2])
        assert np.allclose(mid_gap, lefts + L / 2, atol=1e-15)
        assert np.allclose(child[1::2] - (child[0::2] + Lc), lv.q[k + 1] * L, atol=1e-15)
    # intervals and gaps tile [0, 1]
    k = 12
    total = lv.lengths[k] * 2**k + math.fsum(lv.gaps(k)[1])
    assert total == pytest.approx(1.0, abs=1e-12)


def test_depth_cap():
    with pytest.raises(ValueError):
        build_levels(GapSequence.constant(0.3), MAX_DEPTH + 1)


def test_underflow_uses_log_space():
    seq = GapSequence.double_exponential()
    lv = build_levels(seq, 12)
    assert np.all(np.isfinite(lv.log_lengths))
    expected = -sum(2.0**j * math.log(2) + math.log(2) for j in range(1, 13))
    assert log_interval_length(seq, 12) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("q,ratio", [(Fraction(1, 3), 1.0), (Fraction(1, 2), 2.0)])
def test_check_gap_bound_examples(q, ratio):
    rep = check_gap_bound(build_levels(GapSequence.constant(q), 6), float(q))
    assert rep.passed and rep.min_ratio == pytest.approx(ratio, rel=1e-12)


def test_check_gap_bound_seeded_and_failure():
    assert check_gap_bound(build_levels(GapSequence.seeded_uniform(0.2, 0.8, 7), 10), 0.2).passed
    rep = check_gap_bound(build_levels(GapSequence.constant(0.1), 4), 0.5)
    assert not rep.passed


def test_geometric_variant_gap_bound():
    a = 0.5
    lv = build_levels(GapSequence.geometric(a), 14)
    for k in range(1, 15):
        ratios = np.exp(lv.gap_log_ratios(k))
        assert np.all(ratios >= 2 * a**k * (1 - 1e-12))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**63), st.floats(0.05, 0.95))
def test_lemma41_property(seed, delta):
    seq = GapSequence.seeded_uniform(delta, min(0.999, delta + 0.5), seed)
    lv = build_levels(seq, 10)
    assert check_gap_bound(lv, delta).passed
