"""Capacity criterion, box-counting dimension and Astala's distortion bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .construction import CantorLevels, build_levels
from .ledger import asymptotic_conformality
from .sequences import GapSequence

# --------------------------------------------------------------------------
# capacity (Eq. (eqn:Cap=0)):  Cap E = 0  <=>  prod (1-q_n)^(2^-n) = 0


@dataclass(frozen=True)
class CapacityReport:
    N: int
    partial_sums: np.ndarray  # S_1 .. S_N
    verdict: str  # "zero-capacity" | "positive-capacity" | "undecided"
    certificate: str
    tail_bound: float | None = None  # |S_inf - S_N| <= tail_bound (positive case)
    limit: float | None = None  # closed-form S_inf when known

    @property
    def S_N(self) -> float:
        return float(self.partial_sums[-1])


def capacity_partial_sums(seq: GapSequence, N: int) -> np.ndarray:
    terms = np.array([math.ldexp(seq.log_one_minus_q(n), -n) for n in range(1, N + 1)])
    return np.cumsum(terms)


def capacity_classify(seq: GapSequence, N: int) -> CapacityReport:
    """S_N = sum_{n<=N} 2^-n log(1-q_n); the verdict needs a generator certificate."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if seq.finite_length is not None:
        N = min(N, seq.finite_length)
    S = capacity_partial_sums(seq, N)
    kind, p = seq.kind, seq.params
    if kind == "double_exponential":
        return CapacityReport(N, S, "zero-capacity",
                              "2^-n log(1-q_n) = -log 2 for every n: S_N = -N log 2 diverges")
    if kind == "approach_one":
        b = float(p[0])
        # sum_{n>N} n 2^-n = (N+2) 2^-N
        tail = (N + 2) * math.ldexp(math.log(b), -N)
        return CapacityReport(N, S, "positive-capacity",
                              f"ratio test: |2^-n log(1-q_n)| = n log({b}) 2^-n, ratio -> 1/2",
                              tail, -2.0 * math.log(b))
    margin = seq.upper_margin()
    if margin is not None and kind != "explicit":
        bound = -math.log(margin)
        limit = math.log1p(-float(p[0])) if kind == "constant" else None
        return CapacityReport(N, S, "positive-capacity",
                              f"upper bound q_n <= 1-{margin:.6g}: terms <= {bound:.6g} 2^-n",
                              math.ldexp(bound, -N), limit)
    return CapacityReport(N, S, "undecided",
                          "no generator-level tail certificate; S_N reported only")


# --------------------------------------------------------------------------
# box dimension


@dataclass(frozen=True)
class DimensionEstimate:
    log_scales: np.ndarray  # log eps_k
    counts: np.ndarray
    slope: float
    half_width: float
    fit_levels: tuple[int, int]
    verdict: str = "ok"  # or "undecided"

    @property
    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    def rows(self):
        for ls, c in zip(self.log_scales, self.counts):
            yield float(np.exp(ls)), int(c)


def box_dimension(levels: CantorLevels, conf: float = 0.95) -> DimensionEstimate:
    """Slope of log N(eps_k) against -log eps_k with eps_k = |I_k|, N = 2^k.

    The fit uses the deepest half of the levels.  The band half-width is
    max(t * SE, |slope - last local slope|): a linear fit has SE = 0 for
    exactly self-similar sets, so the local-slope drift guards the rest.
    """
    depth = levels.depth
    if depth < 6:
        raise ValueError("box_dimension needs depth >= 6")
    ls = np.asarray(levels.log_lengths, dtype=float)
    counts = 2.0 ** np.arange(depth + 1)
    lo = depth - depth // 2
    x = -ls[lo:]
    y = np.log(counts[lo:])
    if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
        return DimensionEstimate(ls, counts, math.nan, math.nan, (lo, depth), "undecided")
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.5 + conf / 2, x.size - 2)
    local = (y[-1] - y[-2]) / (x[-1] - x[-2])
    hw = max(t * fit.stderr, abs(fit.slope - local))
    return DimensionEstimate(ls, counts, float(fit.slope), float(hw), (lo, depth))


def astala_bound(K: float, dim: float) -> float:
    """2 K dim / (2 + (K-1) dim): Astala's bound for dim_H f(E)."""
    if K < 1 or not 0 <= dim <= 2:
        raise ValueError("need K >= 1 and 0 <= dim <= 2")
    return 2 * K * dim / (2 + (K - 1) * dim)


# --------------------------------------------------------------------------
# Corollary 1.4 surrogate


@dataclass
class DimensionCheck:
    verdict: str  # "equal", "different" or "inapplicable"
    dim: float | None = None
    dim_t: float | None = None
    half_width: float | None = None
    thresholds: dict = field(default_factory=dict)  # eps -> N(eps)
    sandwich: dict = field(default_factory=dict)  # eps -> (ok, lo, hi)
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict in ("equal", "inapplicable")


EPS_SWEEP = (0.2, 0.1, 0.05)


def dimension_equality_check(w: GapSequence, wt: GapSequence, depth: int,
                             eps_list=EPS_SWEEP, horizon: int = 10_000,
                             tol: float = 0.02, delta: float | None = None) -> DimensionCheck:
    """Box dimensions of E(w) and E(wt) agree, plus Astala's two-sided sandwich.

    The sandwich uses K = 1 + eps beyond N(eps): the map restricted to a
    neighbourhood of the Cantor set is (1+eps)-quasiconformal, so each
    dimension is at most astala_bound(1+eps, other dimension).
    """
    check = DimensionCheck("inapplicable")
    for eps in eps_list:
        N = asymptotic_conformality(w, wt, eps, horizon, delta)
        check.thresholds[eps] = N
        if N is None:
            check.reason = f"asymptotic conformality fails at eps={eps}"
            return check
    a = box_dimension(build_levels(w, depth))
    b = box_dimension(build_levels(wt, depth))
    if a.verdict != "ok" or b.verdict != "ok":
        check.reason = "degenerate scales"
        return check
    check.dim, check.dim_t = a.slope, b.slope
    check.half_width = a.half_width + b.half_width
    band = tol + check.half_width
    ok = abs(a.slope - b.slope) <= band
    for eps in eps_list:
        K = 1.0 + eps
        hi_t = astala_bound(K, min(a.slope, 2.0))
        hi = astala_bound(K, min(b.slope, 2.0))
        good = b.slope <= hi_t + band and a.slope <= hi + band
        check.sandwich[eps] = (good, hi, hi_t)
        ok = ok and good
    check.verdict = "equal" if ok else "different"
    return check
