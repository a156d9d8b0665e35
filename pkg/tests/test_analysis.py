import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cantorqc.analysis import (astala_bound, box_dimension, capacity_classify, capacity_partial_sums,
                               dimension_equality_check)
from cantorqc.construction import build_levels
from cantorqc.sequences import GapSequence, parse_sequence

C3 = GapSequence.constant(Fraction(1, 3))


def mp_log_product(qs):
    """Oracle: log prod (1-q_n)^(2^-n) in 50-digit arithmetic."""
    with mpmath.workdps(50):
        prod = mpmath.mpf(1)
        for n, q in enumerate(qs, start=1):
            prod *= (1 - mpmath.mpf(q)) ** (mpmath.mpf(2) ** -n)
        return float(mpmath.log(prod))


def test_partial_sums_match_mpmath():
    seq = GapSequence.seeded_uniform(0.1, 0.9, 4)
    S = capacity_partial_sums(seq, 40)
    assert S[-1] == pytest.approx(mp_log_product([seq.q(n) for n in range(1, 41)]), rel=1e-13)


def test_capacity_constant():
    rep = capacity_classify(C3, 60)
    assert rep.verdict == "positive-capacity"
    assert rep.S_N == pytest.approx(math.log(2 / 3), abs=1e-15)


def test_capacity_dexp_zero():
    rep = capacity_classify(GapSequence.double_exponential(), 50)
    assert rep.verdict == "zero-capacity"
    assert rep.S_N == pytest.approx(-50 * math.log(2), rel=1e-14)


def test_capacity_approach_one_positive():
    rep = capacity_classify(GapSequence.approach_one(4), 60)
    assert rep.verdict == "positive-capacity"
    assert abs(rep.S_N - rep.limit) <= rep.tail_bound
    # limit -2 log b from sum n 2^-n = 2
    assert rep.limit == pytest.approx(-2 * math.log(4))
    with mpmath.workdps(60):
        qs = [1 - mpmath.mpf(4) ** -n for n in range(1, 61)]
        mp = mp_log_product(qs)
    assert rep.S_N == pytest.approx(mp, rel=1e-12)


def test_capacity_explicit_undecided_and_truncated():
    rep = capacity_classify(GapSequence.explicit([0.5, 0.5, 0.5]), 20)
    assert rep.verdict == "undecided" and rep.N == 3


def brute_box_count(levels, depth, eps):
    """Oracle: number of eps-mesh cells meeting the level-`depth` intervals."""
    lefts, L = levels.intervals(depth)
    cells = set()
    for a in lefts:
        lo, hi = math.floor(a / eps), math.floor((a + L) / eps * (1 - 1e-12))
        cells.update(range(lo, hi + 1))
    return len(cells)


def test_box_dimension_against_brute_force_grid():
    seq = GapSequence.seeded_uniform(0.3, 0.5, 21)
    lv = build_levels(seq, 14)
    est = box_dimension(lv)
    js = np.arange(5, 11)
    eps = np.exp(lv.log_lengths[js])
    counts = [brute_box_count(lv, 14, e) for e in eps]
    slope = np.polyfit(-np.log(eps), np.log(counts), 1)[0]
    assert abs(slope - est.slope) < 0.05


@pytest.mark.parametrize("spec,dim", [("const:1/3", math.log(2) / math.log(3)), ("const:1/2", 0.5)])
def test_box_dimension_exact_self_similar(spec, dim):
    est = box_dimension(build_levels(parse_sequence(spec), 14))
    assert est.slope == pytest.approx(dim, abs=1e-3)
    assert abs(est.slope - dim) <= est.half_width + 1e-9


def test_box_dimension_needs_depth():
    with pytest.raises(ValueError):
        box_dimension(build_levels(C3, 5))


def test_astala_bound():
    assert astala_bound(1.0, 0.63) == pytest.approx(0.63)
    assert astala_bound(2.0, 1.0) == pytest.approx(4 / 3)
    assert astala_bound(1.5, 0.5) > 0.5


def test_dimension_equality_check():
    chk = dimension_equality_check(C3, parse_sequence("decay:1/3:1:2:1"), 14, horizon=2000)
    assert chk.verdict == "equal" and chk.passed
    assert chk.thresholds == {0.2: 9, 0.1: 13, 0.05: 19}
    inap = dimension_equality_check(C3, GapSequence.constant(0.5), 10, horizon=100)
    assert inap.verdict == "inapplicable" and inap.passed
