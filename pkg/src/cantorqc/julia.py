"""Numeric and combinatorial content of Theorem I for f_c(z) = z^2 + c.

* classify_quadratic: escape of the critical orbit (c outside M => Cantor
  Julia set, hyperbolic).
* hyperbolicity_certificate: Prop 2.1's |(f^m)'| > 1 on J, sampled by
  seeded inverse iteration.
* fatou_exhaustion_census: components of the sublevel sets
  S_k = {z : |f^j(z)| <= R0, j <= k} (the complement of Omega_k) and of the
  shells S_k minus S_{k+1}, found by flood fill on per-component raster tiles.
* plan_matching: the §3 bookkeeping (N0, l0, L1) matching shells to blocks
  of the standard Cantor complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import ndimage

# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class QuadraticVerdict:
    c: complex
    verdict: str  # "cantor-hyperbolic" | "connected-or-undecided"
    escape_iter: int | None
    escape_radius: float

    @property
    def cantor(self) -> bool:
        return self.verdict == "cantor-hyperbolic"


def classify_quadratic(c: complex, max_iter: int = 500, escape_radius: float | None = None) -> QuadraticVerdict:
    """Iterate the critical point 0; escape beyond max(2, |c|) within budget => Cantor."""
    c = complex(c)
    floor = max(2.0, abs(c))
    R = floor if escape_radius is None else float(escape_radius)
    if R < floor:
        raise ValueError(f"escape radius must be >= max(2, |c|) = {floor}")
    z = 0j
    for n in range(1, max_iter + 1):
        z = z * z + c
        if abs(z) > R:
            return QuadraticVerdict(c, "cantor-hyperbolic", n, R)
    return QuadraticVerdict(c, "connected-or-undecided", None, R)


# --------------------------------------------------------------------------
# Prop 2.1 certificate


@dataclass(frozen=True)
class HyperbolicityReport:
    c: complex
    m: int | None
    min_derivative: float | None
    samples: int
    passed: bool
    tried: dict = field(default_factory=dict)  # m -> min |(f^m)'|
    verdict: str = "ok"  # or "inapplicable"


def julia_samples(c: complex, samples: int, seed: int = 0, depth: int = 40) -> np.ndarray:
    """Points near J by backward iteration with random square-root branches."""
    rng = np.random.default_rng(seed)
    R = max(2.0, abs(c)) + 1.0
    z = R * np.exp(2j * np.pi * rng.random(samples))
    for _ in range(depth):
        w = z - c
        bad = np.abs(w) < 1e-12  # sitting on the critical value: resample
        while np.any(bad):
            z[bad] = R * np.exp(2j * np.pi * rng.random(int(bad.sum())))
            w = z - c
            bad = np.abs(w) < 1e-12
        sign = np.where(rng.random(samples) < 0.5, 1.0, -1.0)
        z = sign * np.sqrt(w)
    return z


def hyperbolicity_certificate(c: complex, m: int = 1, samples: int = 2000, seed: int = 0,
                              m_max: int = 8, depth: int = 40) -> HyperbolicityReport:
    """min over sampled Julia points of |(f^m)'(z)| = prod_j |2 f^j(z)|; retry larger m."""
    c = complex(c)
    if not classify_quadratic(c).cantor:
        return HyperbolicityReport(c, None, None, 0, False, verdict="inapplicable")
    z = julia_samples(c, samples, seed, depth)
    tried = {}
    for mm in range(m, m_max + 1):
        deriv = np.ones(z.shape)
        w = z.copy()
        for _ in range(mm):
            deriv *= np.abs(2 * w)
            w = w * w + c
        lo = float(deriv.min())
        tried[mm] = lo
        if lo > 1.0:
            return HyperbolicityReport(c, mm, lo, samples, True, tried)
    return HyperbolicityReport(c, m_max, tried[m_max], samples, False, tried)


# --------------------------------------------------------------------------
# exhaustion census


def default_R0(c: complex) -> float:
    """Radius of Omega_0 = {|z| > R0}.

    For |c| > 2 we take the midpoint of ((1+sqrt(1+4|c|))/2, |c|): Omega_0 is
    then forward invariant *and* contains the critical value, so f maps each
    component of S_k univalently onto a component of S_{k-1} and the counts
    are exactly 2^k.  Otherwise max(2, |c|) + 1 (the spec's default).
    """
    a = abs(complex(c))
    if a > 2:
        return 0.5 * ((1 + math.sqrt(1 + 4 * a)) / 2 + a)
    return max(2.0, a) + 1.0


@numba.njit(cache=True)
def _escape_index(x0, y0, step, n, cr, ci, R0, max_iter):  # pragma: no cover - jitted
    out = np.empty((n, n), dtype=np.int32)
    R2 = R0 * R0
    for a in range(n):
        y = y0 + a * step
        for b in range(n):
            zr = x0 + b * step
            zi = y
            j = 0
            while j <= max_iter:
                if zr * zr + zi * zi > R2:
                    break
                zr, zi = zr * zr - zi * zi + cr, 2.0 * zr * zi + ci
                j += 1
            out[a, b] = j
    return out


def escape_raster(c: complex, center: complex, half: float, n: int, R0: float, max_iter: int) -> np.ndarray:
    """escape[a, b] = first j with |f^j(z)| > R0 (max_iter+1 if none) at pixel centres."""
    step = 2.0 * half / n
    x0 = center.real - half + 0.5 * step
    y0 = center.imag - half + 0.5 * step
    return _escape_index(x0, y0, step, n, c.real, c.imag, R0, max_iter)


_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class Tile:
    center: complex
    half: float
    anchor: complex  # a point of the component this tile is about


@dataclass(frozen=True)
class TileResult:
    children: list  # child Tiles (components of S_{k+1} inside this component)
    shell_components: int
    boundary_curves: list  # per shell component
    min_child_px: int


def _pixel_of(z: complex, t: Tile, n: int) -> tuple[int, int]:
    step = 2 * t.half / n
    b = int(math.floor((z.real - (t.center.real - t.half)) / step))
    a = int(math.floor((z.imag - (t.center.imag - t.half)) / step))
    return min(max(a, 0), n - 1), min(max(b, 0), n - 1)


def _component_at(labels: np.ndarray, pix: tuple[int, int]) -> int:
    lab = labels[pix]
    if lab:
        return int(lab)
    _, (ia, ib) = ndimage.distance_transform_edt(labels == 0, return_indices=True)
    return int(labels[ia[pix], ib[pix]])


def _analyse_tile(c: complex, k: int, t: Tile, n: int, R0: float) -> TileResult:
    esc = escape_raster(c, t.center, t.half, n, R0, k + 2)
    lab_k, _ = ndimage.label(esc > k, structure=_FOUR)
    comp = lab_k == _component_at(lab_k, _pixel_of(t.anchor, t, n))
    kids = comp & (esc > k + 1)
    lab_c, nc = ndimage.label(kids, structure=_FOUR)
    step = 2 * t.half / n
    children = []
    min_px = n
    for j, sl in enumerate(ndimage.find_objects(lab_c), start=1):
        ys, xs = sl
        h = max(ys.stop - ys.start, xs.stop - xs.start)
        min_px = min(min_px, h)
        a, b = np.argwhere(lab_c[sl] == j)[0]
        anchor = complex(t.center.real - t.half + (xs.start + b + 0.5) * step,
                         t.center.imag - t.half + (ys.start + a + 0.5) * step)
        cx = t.center.real - t.half + 0.5 * (xs.start + xs.stop) * step
        cy = t.center.imag - t.half + 0.5 * (ys.start + ys.stop) * step
        children.append(Tile(complex(cx, cy), 0.5 * (h + 2) * step * 1.1, anchor))
    shell = comp & ~kids
    lab_s, ns = ndimage.label(shell, structure=_FOUR)
    curves = []
    for j in range(1, ns + 1):
        rest, nr = ndimage.label(lab_s != j, structure=_EIGHT)
        border = set(np.unique(np.concatenate([rest[0], rest[-1], rest[:, 0], rest[:, -1]]))) - {0}
        curves.append(1 + nr - len(border))
    return TileResult(children, ns, curves, min_px if nc else 0)


@dataclass
class CensusLevel:
    k: int
    sublevel_components: int
    shell_components: int | None = None
    boundary_curves: list = field(default_factory=list)
    stable: bool = True

    def row(self) -> tuple:
        curves = " ".join(str(b) for b in self.boundary_curves)
        return (self.k, self.sublevel_components,
                "" if self.shell_components is None else self.shell_components, curves,
                "stable" if self.stable else "undecided")


@dataclass
class ExhaustionCensus:
    c: complex
    R0: float
    grid: int
    levels: list[CensusLevel]
    verdict: str = "ok"

    def counts(self) -> list[int]:
        return [lv.sublevel_components for lv in self.levels]

    def stable_through(self) -> int:
        k = -1
        for lv in self.levels:
            if not lv.stable:
                break
            k = lv.k
        return k


MIN_COMPONENT_PX = 4


def fatou_exhaustion_census(c: complex, k_max: int, grid: int = 1024, R0: float | None = None,
                            check_refinement: bool = True) -> ExhaustionCensus:
    """Per-k census of S_k = C minus Omega_k and of the shells S_k minus S_{k+1}.

    Each component of S_k gets its own square raster (10% margin) at ``grid``
    and, when ``check_refinement``, at 2*grid; a level is trusted when both
    agree and every child spans at least MIN_COMPONENT_PX pixels.
    """
    c = complex(c)
    if not classify_quadratic(c).cantor:
        return ExhaustionCensus(c, R0 or default_R0(c), grid, [], verdict="inapplicable")
    R0 = default_R0(c) if R0 is None else float(R0)
    tiles = [Tile(0j, 1.1 * R0, 0j)]
    levels = [CensusLevel(0, 1)]
    for k in range(k_max):
        nxt, shells, curves, stable = [], 0, [], levels[-1].stable
        for t in tiles:
            res = _analyse_tile(c, k, t, grid, R0)
            if check_refinement:
                fine = _analyse_tile(c, k, t, 2 * grid, R0)
                if (len(fine.children) != len(res.children)
                        or fine.shell_components != res.shell_components
                        or fine.boundary_curves != res.boundary_curves):
                    stable = False
            if res.children and res.min_child_px < MIN_COMPONENT_PX:
                stable = False
            nxt.extend(res.children)
            shells += res.shell_components
            curves.extend(res.boundary_curves)
        levels[-1].shell_components = shells
        levels[-1].boundary_curves = curves
        levels[-1].stable = levels[-1].stable and stable
        levels.append(CensusLevel(k + 1, len(nxt), stable=stable))
        tiles = nxt
    return ExhaustionCensus(c, R0, grid, levels)


# --------------------------------------------------------------------------
# §3 matching plan


@dataclass(frozen=True)
class BlockPlan:
    j: int
    L: int
    L1: int
    partial: int  # pants in the incomplete row, L - 2^L1

    @property
    def pants(self) -> int:
        return (2**self.L1 - 1) + self.partial

    @property
    def curves(self) -> int:
        return self.pants + 2


@dataclass(frozen=True)
class MatchingPlan:
    ell: int
    N0: int
    ell0: int
    blocks: tuple

    @property
    def K_pants(self) -> int:
        """P_{N0} has 2^N0 - 1 pants, plus l0 pants of row N0 + 1."""
        return 2**self.N0 - 1 + self.ell0

    @property
    def K_curves(self) -> int:
        return self.K_pants + 2

    def problems(self) -> list[str]:
        bad = []
        if not 2**self.N0 + 1 <= self.ell < 2 ** (self.N0 + 1) + 1:
            bad.append("N0 bracket")
        if self.ell0 < 0 or self.ell0 != self.ell - 2**self.N0 - 1:
            bad.append("l0")
        if self.K_curves != self.ell:
            bad.append("K boundary count")
        for b in self.blocks:
            if not 2**b.L1 <= b.L < 2 ** (b.L1 + 1):
                bad.append(f"L1 bracket for block {b.j}")
            if b.pants != b.L - 1 or b.curves != b.L + 1:
                bad.append(f"block {b.j} counts")
        return bad

    def lines(self) -> list[str]:
        out = [f"l = {self.ell}", f"N0 = {self.N0}  (2^N0 + 1 = {2**self.N0 + 1} <= l)",
               f"l0 = {self.ell0}", f"K: {self.K_pants} pants, {self.K_curves} boundary curves"]
        for b in self.blocks:
            out.append(f"G_1,{b.j}: L={b.L} L1={b.L1} partial={b.partial} "
                       f"pants={b.pants} curves={b.curves}")
        return out


def plan_matching(ell: int, L) -> MatchingPlan:
    """N0 = max{N : 2^N + 1 <= l}, l0 = l - 2^N0 - 1, L1(j) = max{m : 2^m <= L(j)}."""
    ell = int(ell)
    L = [int(v) for v in L]
    if ell < 3:
        raise ValueError("l must be >= 3")
    if any(v < 2 for v in L):
        raise ValueError("every L(j) must be >= 2")
    N0 = (ell - 1).bit_length() - 1
    blocks = tuple(BlockPlan(j, v, v.bit_length() - 1, v - 2 ** (v.bit_length() - 1))
                   for j, v in enumerate(L, start=1))
    return MatchingPlan(ell, N0, ell - 2**N0 - 1, blocks)
