"""Analytic dilatation budgets of §4 Steps 5-6 and the §6 Example.

Step 5:  d(phi_k,+-) <= A1^-1 (|log((1-q~)/(1-q))| + |q - q~|)
Step 6:  d(psi_k)    <= A2^-1 |q - q~|

with A1 = log((1+d^2)/(1-d^2)) and A2 = log((1+d)/(1+d(1-d))).  Both
bounds are dominated by the sequence metric, giving
d(Phi_k) <= C(delta) d(omega, omega~) with C = 2/A1 + 1/A2.

Level k always refers to the pants P_k, whose holes are governed by q_{k+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .maps import build_pants_map
from .sequences import Distance, GapSequence, effective_delta, sequence_distance

DELTA_DIVERGE = 1e-6


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def A1(delta: float) -> float:
    _check_delta(delta)
    return math.log1p(2 * delta * delta / (1 - delta * delta))


def A2(delta: float) -> float:
    _check_delta(delta)
    return math.log1p(delta * delta / (1 + delta * (1 - delta)))


def _check_triple(q: float, qt: float, delta: float) -> None:
    _check_delta(delta)
    if not (0 < q < 1 and 0 < qt < 1):
        raise ValueError("q and q~ must lie in (0, 1)")
    if delta > min(q, qt) * (1 + 1e-12):
        raise ValueError(f"delta={delta} exceeds min(q, q~)={min(q, qt)}")


def step5_bound(q: float, qt: float, delta: float) -> float:
    _check_triple(q, qt, delta)
    num = abs(math.log1p(-qt) - math.log1p(-q)) + abs(q - qt)
    return num / A1(delta)


def step6_bound(q: float, qt: float, delta: float) -> float:
    _check_triple(q, qt, delta)
    return abs(q - qt) / A2(delta)


def c_delta(delta: float) -> float:
    """C(delta) = 2/A1 + 1/A2; reported as inf below 1e-6 (diverges as delta -> 0)."""
    _check_delta(delta)
    if delta < DELTA_DIVERGE:
        return math.inf
    return 2.0 / A1(delta) + 1.0 / A2(delta)


@dataclass(frozen=True)
class LedgerRow:
    k: int
    q: float
    qt: float
    step5: float
    step6: float
    total: float
    budget: float
    exact_phi: float | None = None
    exact_psi: float | None = None


@dataclass
class DilatationLedger:
    delta: float
    A1: float
    A2: float
    C: float
    distance: Distance
    rows: list[LedgerRow] = field(default_factory=list)

    @property
    def sup_total(self) -> float:
        return max((r.total for r in self.rows), default=0.0)

    @property
    def budget(self) -> float:
        return self.C * self.distance.value

    def violations(self, tol: float = 1e-12) -> list[str]:
        out = []
        for r in self.rows:
            if r.total > r.budget + tol:
                out.append(f"level {r.k}: total {r.total:.6g} > budget {r.budget:.6g}")
            if r.exact_phi is not None and r.exact_phi > r.step5 + tol:
                out.append(f"level {r.k}: d(phi) {r.exact_phi:.6g} > step5 {r.step5:.6g}")
            if r.exact_psi is not None and r.exact_psi > r.step6 + tol:
                out.append(f"level {r.k}: d(psi) {r.exact_psi:.6g} > step6 {r.step6:.6g}")
        return out


def build_ledger(w: GapSequence, wt: GapSequence, delta: float | None = None,
                 horizon: int = 20, exact: bool = True) -> DilatationLedger:
    """Per-level Step-5/6 bounds for levels k = 0..horizon-1.

    With ``exact`` the Lemma-4.2 dilatations of the built sub-maps are
    recorded next to their bounds.
    """
    if delta is None:
        delta = effective_delta(w, wt)
    dist = sequence_distance(w, wt, horizon)
    C = c_delta(delta)
    led = DilatationLedger(delta, A1(delta), A2(delta), C, dist)
    for k in range(horizon):
        q, qt = w.q(k + 1), wt.q(k + 1)
        s5, s6 = step5_bound(q, qt, delta), step6_bound(q, qt, delta)
        ephi = epsi = None
        if exact:
            pm = build_pants_map(w, wt, delta, k)
            ephi, epsi = pm.d_phi, pm.d_psi
        led.rows.append(LedgerRow(k, q, qt, s5, s6, s5 + s6,
                                  C * dist.value, ephi, epsi))
    return led


def level_totals(w: GapSequence, wt: GapSequence, delta: float, horizon: int) -> np.ndarray:
    """step5 + step6 for levels 0..horizon (vectorized)."""
    n = np.arange(1, horizon + 2)
    q = np.array([w.q(int(j)) for j in n])
    qt = np.array([wt.q(int(j)) for j in n])
    if delta > min(q.min(), qt.min()) * (1 + 1e-12):
        raise ValueError("delta is not a lower bound on the sampled terms")
    s5 = (np.abs(np.log1p(-qt) - np.log1p(-q)) + np.abs(q - qt)) / A1(delta)
    s6 = np.abs(q - qt) / A2(delta)
    return s5 + s6


def asymptotic_conformality(w: GapSequence, wt: GapSequence, eps: float, horizon: int,
                            delta: float | None = None) -> int | None:
    """Least N <= horizon with total(k) < log(1+eps) for every k in (N, horizon]."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if delta is None:
        delta = effective_delta(w, wt)
    totals = level_totals(w, wt, delta, horizon)
    target = math.log1p(eps)
    bad = np.nonzero(~(totals < target))[0]
    if bad.size == 0:
        return 0
    last = int(bad[-1])
    return last if last < horizon else None


# --------------------------------------------------------------------------
# §6 Example: q_n = a^n against q~_n = a^(n+L)


@dataclass(frozen=True)
class GeometricBudget:
    a: float
    L: int
    k_max: int
    totals: np.ndarray  # exact d(phi_k) + d(psi_k), k = 0..k_max-1
    d_phi: np.ndarray
    d_psi: np.ndarray
    paper_bound: np.ndarray  # step5 + step6 with delta_k = q~_{k+1}

    @property
    def sup(self) -> float:
        return float(self.totals.max()) if self.totals.size else 0.0


def geometric_example_budget(a: float, L: int, k_max: int) -> GeometricBudget:
    """Per-level dilatation of the §6 pants maps in geometric mode.

    There is no uniform delta, so each level uses its own radii
    (1 + a^k)|I_k|/2; the totals are the exact Lemma-4.2 dilatations.
    ``paper_bound`` evaluates Steps 5-6 with delta replaced by the level's
    smaller gap parameter, which grows like a^-k and is informational only.
    """
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    if L < 0 or k_max < 1:
        raise ValueError("need L >= 0 and k_max >= 1")
    w = GapSequence.geometric(a)
    wt = GapSequence.shifted_geometric(a, L) if L else w
    phi = np.zeros(k_max)
    psi = np.zeros(k_max)
    paper = np.zeros(k_max)
    for k in range(k_max):
        if L == 0:
            continue
        pm = build_pants_map(w, wt, None, k, mode="geometric")
        phi[k], psi[k] = pm.d_phi, pm.d_psi
        q, qt = w.q(k + 1), wt.q(k + 1)
        d_k = min(q, qt)
        paper[k] = step5_bound(q, qt, d_k) + step6_bound(q, qt, d_k)
    return GeometricBudget(a, L, k_max, phi + psi, phi, psi, paper)


@dataclass(frozen=True)
class GrowthFit:
    a: float
    Ls: np.ndarray
    sups: np.ndarray
    slope: float  # exponent beta in sup ~ C a^(-beta L)
    C: float
    C_min: float  # smallest C with sup(L) <= C a^-L for every fitted L


def geometric_growth_fit(a: float, L_max: int, k_max: int) -> GrowthFit:
    """Fit log sup(L) = log C + beta L log(1/a) over L = 1..L_max."""
    Ls = np.arange(1, L_max + 1)
    sups = np.array([geometric_example_budget(a, int(L), k_max).sup for L in Ls])
    x = Ls * math.log(1 / a)
    if Ls.size >= 2:
        beta, logC = np.polyfit(x, np.log(sups), 1)
    else:
        beta, logC = 1.0, float(np.log(sups[0]) - x[0])
    c_min = float(np.max(sups * a ** Ls.astype(float)))
    return GrowthFit(a, Ls, sups, float(beta), float(math.exp(logC)), c_min)
