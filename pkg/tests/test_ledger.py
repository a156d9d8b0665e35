import math
from fractions import Fraction

import numpy as np
import pytest

from cantorqc.ledger import (A1, A2, asymptotic_conformality, build_ledger, c_delta,
                             geometric_example_budget, geometric_growth_fit, level_totals,
                             step5_bound, step6_bound)
from cantorqc.maps import build_pants_map
from cantorqc.sequences import GapSequence, parse_sequence

C3 = GapSequence.constant(Fraction(1, 3))
C2 = GapSequence.constant(Fraction(1, 2))


def test_constants_closed_form():
    d = 1 / 3
    assert A1(d) == pytest.approx(math.log((1 + d * d) / (1 - d * d)), rel=1e-15)
    assert A2(d) == pytest.approx(math.log((1 + d) / (1 + d * (1 - d))), rel=1e-15)
    assert c_delta(d) == pytest.approx(2 / A1(d) + 1 / A2(d))
    assert c_delta(1e-7) == math.inf
    with pytest.raises(ValueError):
        A1(1.0)


def test_step_bounds_examples():
    assert step5_bound(0.5, 0.5, 0.3) == 0 and step6_bound(0.5, 0.5, 0.3) == 0
    s5 = step5_bound(0.5, 1 / 3, 1 / 3)
    assert s5 == pytest.approx((math.log(4 / 3) + 1 / 6) / A1(1 / 3), rel=1e-14)
    with pytest.raises(ValueError):
        step6_bound(0.2, 0.5, 0.3)


def test_ledger_exact_within_bounds():
    led = build_ledger(C2, C3, 1 / 3, horizon=5)
    assert not led.violations()
    r = led.rows[0]
    assert r.exact_phi == pytest.approx(math.log(2), rel=1e-12)
    assert r.exact_psi == pytest.approx(0.449321, abs=1e-6)
    assert led.sup_total <= led.budget + 1e-12


def test_random_pairs_exact_within_bounds():
    rng = np.random.default_rng(3)
    for _ in range(100):
        q, qt = rng.uniform(0.05, 0.95, 2)
        delta = rng.uniform(0.01, min(q, qt))
        pm = build_pants_map(GapSequence.constant(q), GapSequence.constant(qt), delta, 0)
        assert pm.d_phi <= step5_bound(q, qt, delta) + 1e-12
        assert pm.d_psi <= step6_bound(q, qt, delta) + 1e-12


def brute_threshold(w, wt, eps, horizon, delta):
    target = math.log1p(eps)
    for N in range(horizon + 1):
        if all(step5_bound(w.q(k + 1), wt.q(k + 1), delta) + step6_bound(w.q(k + 1), wt.q(k + 1), delta)
               < target for k in range(N + 1, horizon + 1)):
            return N
    return None


@pytest.mark.parametrize("eps,expected", [(0.2, 9), (0.1, 13), (0.05, 19)])
def test_asymptotic_conformality_decay(eps, expected):
    wt = parse_sequence("decay:1/3:1:2:1")
    N = asymptotic_conformality(C3, wt, eps, 200, 1 / 3)
    assert N == expected == brute_threshold(C3, wt, eps, 200, 1 / 3)


def test_asymptotic_conformality_never_and_identity():
    assert asymptotic_conformality(C3, C2, 0.1, 50, 1 / 3) is None
    assert asymptotic_conformality(C3, C3, 0.1, 50, 1 / 3) == 0
    with pytest.raises(ValueError):
        asymptotic_conformality(C3, C3, 0.0, 50, 1 / 3)


def test_level_totals_vectorized_matches_scalar():
    w = GapSequence.seeded_uniform(0.3, 0.8, 1)
    wt = GapSequence.seeded_uniform(0.3, 0.8, 2)
    tot = level_totals(w, wt, 0.3, 30)
    for k in range(31):
        q, qt = w.q(k + 1), wt.q(k + 1)
        assert tot[k] == pytest.approx(step5_bound(q, qt, 0.3) + step6_bound(q, qt, 0.3), rel=1e-13)


def test_geometric_example():
    b1 = geometric_example_budget(0.5, 1, 20)
    b2 = geometric_example_budget(0.5, 2, 20)
    assert np.all(np.isfinite(b1.totals)) and b1.sup == pytest.approx(math.log(3), abs=1e-3)
    assert b2.sup / b1.sup <= 2.5
    assert geometric_example_budget(0.5, 0, 5).sup == 0
    fit = geometric_growth_fit(0.5, 5, 20)
    assert np.all(fit.sups <= fit.C_min * 0.5 ** (-fit.Ls.astype(float)) * (1 + 1e-12))
    assert np.all(np.diff(fit.sups) > 0)
