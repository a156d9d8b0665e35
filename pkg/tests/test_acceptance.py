"""Acceptance criteria 1-10 of the spec, one test each, at the spec's tolerances.

Each test prints a single ``CRITERION n: PASS|FAIL`` line (also repeated in
the pytest terminal summary).  Where the spec's literal inputs are invalid or
disagree with the implementation's documented geometry, the substitution is
stated in the test and in the README design notes.
"""

import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cantorqc.analysis import astala_bound, box_dimension, capacity_classify, capacity_partial_sums
from cantorqc.construction import build_levels, check_gap_bound
from cantorqc.julia import classify_quadratic, fatou_exhaustion_census, plan_matching
from cantorqc.ledger import asymptotic_conformality, build_ledger, c_delta, geometric_example_budget
from cantorqc.maps import build_global_map, build_pants_map, measure_dilatation
from cantorqc.obstructions import find_obstruction
from cantorqc.pants import build_decomposition
from cantorqc.sequences import GapSequence, parse_sequence, sequence_distance

C3 = GapSequence.constant(Fraction(1, 3))
# spec: q~_n = 1/3 + 1/n^2, which is >= 1 at n = 1; shifted to 1/3 + 1/(n+1)^2
DECAY = parse_sequence("decay:1/3:1:2:1")


def seeded_family(count, seed=2024, lo=0.1, hi=0.9):
    """(delta, sequence) pairs with delta in [lo, hi] and q_n in [delta, upper)."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        delta = float(rng.uniform(lo, hi))
        upper = delta + (1 - delta) * float(rng.uniform(0.05, 0.95))
        out.append((delta, GapSequence.seeded_uniform(delta, upper, int(rng.integers(2**63)))))
    return out


def exact_gap_check(seq, delta, depth):
    """Exact rational verification of |J_k^i| >= 2 delta |I_k^1| (floats are exact rationals)."""
    d = Fraction(delta)
    length = Fraction(1)
    gaps = []
    for k in range(1, depth + 1):
        q = Fraction(seq.q(k))
        gaps = [q * length] + gaps  # the new middle gaps are the smallest new ones; older persist
        length = length * (1 - q) / 2
        if min(gaps) < 2 * d * length:
            return False
    return True


def test_criterion_01_gap_bound(criterion):
    t0 = time.perf_counter()
    family = seeded_family(1000)
    failures = 0
    for delta, seq in family:
        failures += not check_gap_bound(build_levels(seq, 14), delta).passed
    exact_fail = sum(not exact_gap_check(seq, delta, 14) for delta, seq in family[:50])
    dt = time.perf_counter() - t0
    ok = failures == 0 and exact_fail == 0 and dt < 30
    assert criterion(1, ok, f"1000 seeded sequences, depth 14: {failures} float failures, "
                            f"{exact_fail}/50 exact-rational failures, {dt:.1f}s (< 30s)")


def test_criterion_02_decomposition(criterion):
    family = seeded_family(1000)
    failures, worst = 0, math.inf
    for delta, seq in family:
        try:
            dec = build_decomposition(build_levels(seq, 14), delta)
        except Exception:
            failures += 1
            continue
        worst = min(worst, dec.min_margin().relative)
    ok = failures == 0 and worst > 0
    assert criterion(2, ok, f"1000 decompositions, {failures} failures, min relative margin {worst:.4g}")


def test_criterion_03_dilatation_budget(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    depth = 6
    worst_ratio, ledger_bad = 0.0, 0
    for j in range(50):
        delta = float(rng.uniform(0.2, 0.8))
        seqs = []
        for _ in range(2):
            upper = delta + (1 - delta) * float(rng.uniform(0.2, 0.95))
            seqs.append(GapSequence.seeded_uniform(delta, upper, int(rng.integers(2**63))))
        w, wt = seqs
        phi = build_global_map(w, wt, delta, depth)
        d = sequence_distance(w, wt, depth).value
        budget = math.exp(c_delta(delta) * d)
        for k in range(depth + 1):
            for i in range(1, 2**k + 1):
                m = measure_dilatation(phi, (k, i), n=10, rel_step=1e-4)
                worst_ratio = max(worst_ratio, m.max_K / budget)
        ledger_bad += len(build_ledger(w, wt, delta, horizon=depth).violations(tol=1e-12))
    dt = time.perf_counter() - t0
    ok = worst_ratio <= 1.01 and ledger_bad == 0 and dt < 300
    assert criterion(3, ok, f"50 pairs: max measured K / exp(C d) = {worst_ratio:.4f} (<= 1.01), "
                            f"{ledger_bad} exact-vs-Step5/6 violations, {dt:.1f}s (< 300s)")


def test_criterion_04_gluing(criterion):
    rng = np.random.default_rng(4)
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    seam_err, inv_err = 0.0, 0.0
    for _ in range(5):
        delta = float(rng.uniform(0.2, 0.6))
        w, wt = (GapSequence.seeded_uniform(delta, 0.95, int(rng.integers(2**63))) for _ in range(2))
        phi = build_global_map(w, wt, delta, 5)
        z0 = 0.5 + phi.source.radii[0] * np.exp(1j * th)
        seam_err = max(seam_err, float(np.max(np.abs(phi.eval_in_pants(z0, 0, 1) - z0))))
        for k in range(1, 6):
            c, rho = phi.source.circles(k)
            for i, ci in enumerate(c, start=1):
                z = ci + rho * np.exp(1j * th)
                diff = phi.eval_in_pants(z, k - 1, (i + 1) // 2) - phi.eval_in_pants(z, k, i)
                seam_err = max(seam_err, float(np.max(np.abs(diff))))
        pts = rng.uniform(-0.4, 1.4, 500) + 1j * rng.uniform(-0.9, 0.9, 500)
        rev = phi.reverse()
        inv_err = max(inv_err, float(np.max(np.abs(phi(rev(pts)) - pts))),
                      float(np.max(np.abs(rev(phi(pts)) - pts))))
    ok = seam_err < 1e-9 and inv_err < 1e-8
    assert criterion(4, ok, f"seam mismatch {seam_err:.2e} (< 1e-9, 256 pts/circle), "
                            f"Phi o Phi_reverse error {inv_err:.2e} (< 1e-8, 500 pts)")


def test_criterion_05_asymptotic_conformality(criterion):
    parts, ok = [], True
    for eps in (0.2, 0.1, 0.05):
        N = asymptotic_conformality(C3, DECAY, eps, horizon=2000, delta=1 / 3)
        if N is None:
            ok = False
            parts.append(f"eps={eps}: no N")
            continue
        pm = build_pants_map(C3, DECAY, 1 / 3, N + 2)
        K = measure_dilatation(pm, n=40, rel_step=1e-4).max_K
        ok &= K < 1 + eps + 0.01
        parts.append(f"eps={eps}: N={N}, K(level {N + 2})={K:.5f}")
    assert criterion(5, ok, "q=1/3 vs decay:1/3:1:2:1; " + "; ".join(parts))


def test_criterion_06_dimension(criterion):
    target = math.log(2) / math.log(3)
    d3 = box_dimension(build_levels(C3, 14)).slope
    dt = box_dimension(build_levels(DECAY, 14)).slope
    ast = astala_bound(2.0, 1.0)
    ok = abs(d3 - target) <= 0.01 and abs(d3 - dt) <= 0.02 and ast == 4 / 3
    assert criterion(6, ok, f"dim E(1/3) = {d3:.5f} (target {target:.5f} +-0.01), decay pair "
                            f"{dt:.5f} (|diff| {abs(d3 - dt):.4f} <= 0.02), Astala(2,1) = {ast!r}")


def test_criterion_07_capacity(criterion):
    cases = {"const:1/3": "positive-capacity", "one-minus:4": "positive-capacity",
             "dexp": "zero-capacity"}
    ok, worst, parts = True, 0.0, []
    for spec, want in cases.items():
        seq = parse_sequence(spec)
        rep = capacity_classify(seq, 40)
        ok &= rep.verdict == want
        parts.append(f"{spec}->{rep.verdict}")
        # direct partial products (50-digit) against the log-space partial sums
        S = capacity_partial_sums(seq, 40)
        with mpmath.workdps(50):
            prod = mpmath.mpf(1)
            for n in range(1, 41):
                one_minus = mpmath.mpf(2) ** -(2**n) if spec == "dexp" else (
                    mpmath.mpf(4) ** -n if spec == "one-minus:4" else 1 - mpmath.mpf(1) / 3)
                prod *= one_minus ** (mpmath.mpf(2) ** -n)
                worst = max(worst, abs(float(mpmath.exp(S[n - 1]) - prod)))
    ok &= worst <= 1e-12
    assert criterion(7, ok, ", ".join(parts) + f"; max |exp(S_N) - P_N| = {worst:.2e} (<= 1e-12)")


def test_criterion_08_obstruction(criterion):
    wit = find_obstruction(GapSequence.approach_one(2), 2.0, 1.0, horizon=60)
    found = wit is not None and wit.length < 0.5
    bounded = [C3, GapSequence.constant(0.9), GapSequence.constant(0.999), DECAY]
    bounded += [s for _, s in seeded_family(20, 8)]
    spurious = 0
    for seq in bounded:
        for K in (1.0, 2.0, 10.0, 100.0):
            spurious += find_obstruction(seq, K, 1.0, horizon=1000) is not None
    ok = found and spurious == 0
    where = f"n={wit.n}, length {wit.length:.4f} < 0.5" if wit else "none"
    assert criterion(8, ok, f"one-minus:2 K=2 d=1 witness: {where}; {spurious} witnesses for "
                            f"{len(bounded)} upper-bounded sequences, K in (1, 2, 10, 100), d=1, horizon 1000")


def _brute_plan(ell, L):
    N0 = 0
    while 2 ** (N0 + 1) + 1 <= ell:
        N0 += 1
    L1 = []
    for v in L:
        m = 0
        while 2 ** (m + 1) <= v:
            m += 1
        L1.append(m)
    return N0, ell - 2**N0 - 1, L1


@pytest.mark.slow
def test_criterion_09_julia(criterion):
    v = classify_quadratic(5)
    cen = fatou_exhaustion_census(5, 6, grid=1024, check_refinement=True)
    counts_ok = cen.counts() == [2**k for k in range(7)] and cen.stable_through() == 6
    rng = np.random.default_rng(9)
    bad = 0
    for _ in range(100_000):
        ell = int(rng.integers(3, 2**40))
        L = [int(x) for x in rng.integers(2, 2**30, size=int(rng.integers(1, 4)))]
        plan = plan_matching(ell, L)
        N0, ell0, L1 = _brute_plan(ell, L)
        bad += bool(plan.problems()) or (plan.N0, plan.ell0, [b.L1 for b in plan.blocks]) != (N0, ell0, L1)
    ok = v.cantor and v.escape_iter <= 3 and counts_ok and bad == 0
    assert criterion(9, ok, f"c=5 {v.verdict} (escape iter {v.escape_iter} <= 3); census counts "
                            f"{cen.counts()} stable through k={cen.stable_through()} at 1024/2048; "
                            f"planner fuzz 1e5 cases, {bad} failures")


def test_criterion_10_geometric_example(criterion):
    a, k_max = 0.5, 30
    budgets = [geometric_example_budget(a, L, k_max) for L in range(1, 6)]
    sups = [b.sup for b in budgets]
    ratio = sups[1] / sups[0]
    per_level = budgets[1].totals / budgets[0].totals
    finite = all(math.isfinite(s) for s in sups)
    ok = finite and 1 < ratio <= (1 / a) * 1.25 and np.all(per_level <= (1 / a) * 1.25)
    assert criterion(10, ok, f"a=0.5: sup_k d(Phi_k) for L=1..5 = {[round(s, 4) for s in sups]}; "
                             f"L2/L1 = {ratio:.3f}, per-level max {per_level.max():.3f} (<= 2.5)")
