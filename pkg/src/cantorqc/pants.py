"""Circle families C_k^i and the normalized / scaled pants of §4 Steps 2-4.

Radii are ``rho_k = (1 + t_k) |I_k| / 2`` with ``t_k = delta`` (fixed mode)
or ``t_k = a**(k+L)`` for a (shifted) geometric generator (geometric mode,
§6 Example).  Circles are centred at interval midpoints.

Normalization of the pants P_k^i (outer circle C_k^i, holes C_{k+1}^{2i-1},
C_{k+1}^{2i}) is ``u = alpha (z - m_i)`` with ``alpha = 2/|I_k|``.  In these
coordinates the outer radius is ``1 + t_k``, the holes sit at ``+-x_k`` with

    x_k = (1 + q_{k+1}) / 2,      r_k = (1 + t_{k+1}) (1 - q_{k+1}) / 2.

This is the midpoint-consistent form.  The paper writes
``x_k = ((1+delta) + (1-delta) q_{k+1}) / 2`` which would put the hole
through a Cantor endpoint (x_k - r_k = q_{k+1}); see the README design notes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .construction import CantorLevels
from .errors import DecompositionError, GeometryError
from .sequences import GapSequence

MARGIN_WARN = 1e-10


# --------------------------------------------------------------------------
# radius parameters


def _geometric_params(seq: GapSequence) -> tuple[float, int]:
    if seq.kind == "geometric":
        return float(seq.params[0]), 0
    if seq.kind == "shifted_geometric":
        return float(seq.params[0]), int(seq.params[1])
    raise ValueError(f"geometric mode needs a geometric generator, got {seq.kind}")


def radius_parameter(seq: GapSequence, delta: float | None, k: int, mode: str = "fixed") -> float:
    """t_k: the relative radius excess of level-k circles."""
    if mode == "fixed":
        if delta is None or not 0.0 < delta < 1.0:
            raise ValueError("fixed mode needs 0 < delta < 1")
        return float(delta)
    if mode == "geometric":
        a, shift = _geometric_params(seq)
        return a ** (k + shift)
    raise ValueError(f"unknown mode {mode!r}")


# --------------------------------------------------------------------------
# decomposition


@dataclass(frozen=True)
class Margin:
    level: int
    kind: str  # "sibling" (same level) or "nested" (parent/child)
    relative: float  # margin / |I_k|
    absolute: float
    pair: tuple


@dataclass
class PantsDecomposition:
    levels: CantorLevels
    delta: float | None
    mode: str
    t: np.ndarray  # t_k, k = 0..depth
    radii: np.ndarray  # rho_k, k = 0..depth
    margins: list[Margin]

    @property
    def depth(self) -> int:
        return self.levels.depth

    def centers(self, k: int) -> np.ndarray:
        return self.levels.midpoints(k)

    def circles(self, k: int) -> tuple[np.ndarray, float]:
        return self.centers(k), float(self.radii[k])

    def children(self, k: int, i: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """1-based children of C_k^i."""
        return (k + 1, 2 * i - 1), (k + 1, 2 * i)

    def min_margin(self) -> Margin | None:
        return min(self.margins, key=lambda m: m.relative) if self.margins else None

    def rows(self) -> Iterator[tuple]:
        """CSV rows ``level, index, center, radius``."""
        for k in range(self.depth + 1):
            c, rho = self.circles(k)
            for i, ci in enumerate(c, start=1):
                yield k, i, float(ci), rho


def _level_margins(levels: CantorLevels, t: np.ndarray) -> list[Margin]:
    out = []
    for k in range(levels.depth + 1):
        if k >= 1:
            ratios = np.exp(levels.gap_log_ratios(k))
            j = int(np.argmin(ratios))
            rel = float(ratios[j]) - t[k]
            out.append(Margin(k, "sibling", rel, rel * levels.lengths[k], ((k, j + 1), (k, j + 2))))
        if k < levels.depth:
            shrink = levels.lengths[k + 1] / levels.lengths[k]
            rel = 0.5 * t[k] - 0.5 * t[k + 1] * shrink
            out.append(Margin(k, "nested", rel, rel * levels.lengths[k], ((k, "*"), (k + 1, "*"))))
    return out


def build_decomposition(levels: CantorLevels, delta: float | None, mode: str = "fixed") -> PantsDecomposition:
    """Circles C_k^i for k = 0..depth with disjointness verified structurally.

    Margins are computed from gap and interval lengths (never by subtracting
    nearby centres) and reported relative to |I_k|.
    """
    t = np.array([radius_parameter(levels.seq, delta, k, mode) for k in range(levels.depth + 1)])
    radii = 0.5 * (1.0 + t) * levels.lengths
    margins = _level_margins(levels, t)
    for m in margins:
        if m.relative <= 0.0:
            raise DecompositionError(
                f"circles {m.pair[0]} and {m.pair[1]} intersect ({m.kind} margin "
                f"{m.relative:.3g}|I_{m.level}|); is delta={delta} a true lower bound?")
        if m.relative < MARGIN_WARN:
            warnings.warn(f"near-tangent circles at level {m.level} ({m.kind}): "
                          f"margin {m.relative:.3g}|I_k|", RuntimeWarning, stacklevel=2)
    return PantsDecomposition(levels, delta, mode, t, radii, margins)


# --------------------------------------------------------------------------
# normalized and scaled pants


@dataclass(frozen=True)
class NormalizedPants:
    k: int
    q: float  # q_{k+1}
    t_outer: float
    t_child: float
    outer: float  # 1 + t_k
    x: float
    r: float

    @property
    def degenerate(self) -> bool:
        return self.r < 1e-12 * self.outer

    @property
    def hole_gap(self) -> float:
        """x - r: distance from the origin to each hole (positive)."""
        return self.q - 0.5 * self.t_child * (1.0 - self.q)


def _normalized(k: int, q: float, t_outer: float, t_child: float) -> NormalizedPants:
    x = 0.5 * (1.0 + q)
    r = 0.5 * (1.0 + t_child) * (1.0 - q)
    return NormalizedPants(k, q, t_outer, t_child, 1.0 + t_outer, x, r)


def normalize_pants(seq: GapSequence, delta: float | None, k: int, mode: str = "fixed") -> NormalizedPants:
    if k < 0:
        raise ValueError("level must be non-negative")
    return _normalized(k, seq.q(k + 1),
                       radius_parameter(seq, delta, k, mode),
                       radius_parameter(seq, delta, k + 1, mode))


def interval_left(levels: CantorLevels, k: int, i: int) -> float:
    """Left end of I_k^i from the bits of i-1 (O(k)); matches levels.lefts."""
    left = 0.0
    for j in range(1, k + 1):
        if (i - 1) >> (k - j) & 1:
            left += levels.lengths[j - 1] - levels.lengths[j]
    return left


def pants_affine(levels: CantorLevels, k: int, i: int) -> tuple[float, float]:
    """(alpha, beta) with u = alpha z + beta normalizing P_k^i (i is 1-based)."""
    if not 1 <= i <= 2**k:
        raise IndexError(f"pants index {i} out of range at level {k}")
    alpha = 2.0 / levels.lengths[k]
    mid = interval_left(levels, k, i) + 0.5 * levels.lengths[k]
    return alpha, -alpha * mid


@dataclass(frozen=True)
class ScaledPants:
    """The other side's pants scaled by s onto the anchor's child centres.

    ``anchor`` is the NormalizedPants whose geometry is kept; ``other`` is
    scaled by ``s = anchor.x / other.x``.
    """

    anchor: NormalizedPants
    other: NormalizedPants
    s: float
    outer: float  # s * other.outer
    r_hat: float  # s * other.r
    R_tilde: float
    rho0: float  # anchor.x + anchor.r, radius of C_{k,0}

    def problems(self) -> list[str]:
        bad = []
        if not self.R_tilde > max(self.r_hat, self.anchor.r):
            bad.append(f"R~={self.R_tilde:.6g} does not enclose child radii "
                       f"{self.r_hat:.6g}, {self.anchor.r:.6g}")
        if not self.rho0 < min(self.outer, self.anchor.outer):
            bad.append(f"C_0 radius {self.rho0:.6g} not inside outer radii "
                       f"{self.outer:.6g}, {self.anchor.outer:.6g}")
        return bad

    @property
    def valid(self) -> bool:
        return not self.problems()


def scale_between(anchor: NormalizedPants, other: NormalizedPants, check: bool = True) -> ScaledPants:
    s = anchor.x / other.x
    outer = s * other.outer
    sp = ScaledPants(anchor, other, s, outer, s * other.r,
                     min(outer - anchor.x, anchor.x), anchor.x + anchor.r)
    if check and not sp.valid:
        raise GeometryError(f"level {anchor.k}: " + "; ".join(sp.problems()))
    return sp


def scale_pants(w: GapSequence, wt: GapSequence, delta: float | None, k: int,
                mode: str = "fixed", check: bool = True) -> ScaledPants:
    """Step 4 literally: scale the pants of ``wt`` by s_k = x_k / x~_k.

    Raises GeometryError when that orientation is invalid (which happens
    when q~ > q); build_pants_map picks the valid orientation itself.
    """
    return scale_between(normalize_pants(w, delta, k, mode), normalize_pants(wt, delta, k, mode), check)


def nested_margin_exact(q_next: float, t_k: float, t_next: float) -> float:
    """Parent/child margin relative to |I_k|: (t_k - t_{k+1}(1-q)/2)/2."""
    return 0.5 * t_k - 0.25 * t_next * (1.0 - q_next)


__all__ = [
    "PantsDecomposition", "NormalizedPants", "ScaledPants", "Margin",
    "build_decomposition", "normalize_pants", "scale_pants", "scale_between",
    "pants_affine", "interval_left", "radius_parameter", "nested_margin_exact",
    "MARGIN_WARN",
]
