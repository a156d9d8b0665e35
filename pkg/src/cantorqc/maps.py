"""Radial annulus maps (Lemma 4.2), the per-pants maps of §4 Steps 5-6 and
the glued global map Phi of Step 7, plus finite-difference dilatation
measurement.

Per-pants construction (normalized coordinates, see pants.py).  Of the two
sides at level k the *anchor* A is the one with the larger hole offset x
(equivalently larger q_{k+1}); the other side O is scaled by
``s = x_A / x_O >= 1`` so that its holes sit at ``+-x_A``.  Then

* phi_+- : AnnulusMap about +-x_A taking radius s r_O to r_A, identity on the
  circle of radius R~ = min(s R0_O - x_A, x_A)  (Step 5),
* psi    : AnnulusMap about 0 fixing rho0 = x_A + r_A and taking s R0_O to
  R0_A  (Step 6),

and H = psi o phi maps the scaled O-pants onto the A-pants.  The paper only
treats the orientation q >= q~ and asserts the other is "the same"; scaling
the larger-x side down instead can push R~ below the hole radius, so we
always anchor on the larger side and use the closed-form inverse H^-1 when
the direction requires it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .construction import build_levels
from .errors import DegenerateMapError, GeometryError, MapDomainError
from .pants import (NormalizedPants, PantsDecomposition, ScaledPants, build_decomposition,
                    normalize_pants, scale_between)
from .sequences import GapSequence

DOMAIN_RTOL = 1e-9

# regime bits (within one pants)
PHI_PLUS, PHI_MINUS, PSI = 1, 2, 4


# --------------------------------------------------------------------------
# Lemma 4.2


@dataclass(frozen=True)
class AnnulusMap:
    """Radial stretch {r1 <= |z-c1| <= R1} -> {r2 <= |w-c2| <= R2}."""

    c1: complex
    r1: float
    R1: float
    c2: complex
    r2: float
    R2: float

    def __post_init__(self):
        if not (0 < self.r1 < self.R1 and 0 < self.r2 < self.R2):
            raise GeometryError(f"bad annulus radii {self.r1}, {self.R1} -> {self.r2}, {self.R2}")

    @classmethod
    def about(cls, c: complex, r1: float, R1: float, r2: float, R2: float) -> "AnnulusMap":
        return cls(c, r1, R1, c, r2, R2)

    @property
    def rho(self) -> float:
        return (math.log(self.R2) - math.log(self.r2)) / (math.log(self.R1) - math.log(self.r1))

    @property
    def d(self) -> float:
        """Exact log-dilatation |log rho| (Lemma 4.2)."""
        return abs(math.log(self.rho))

    @property
    def K(self) -> float:
        return math.exp(self.d)

    def inverse(self) -> "AnnulusMap":
        return AnnulusMap(self.c2, self.r2, self.R2, self.c1, self.r1, self.R1)

    def __call__(self, z, check: bool = True):
        return annulus_map_eval(self, z, check)

    def eval_with_regime(self, z):
        return annulus_map_eval(self, z, check=False), np.zeros(np.shape(z), dtype=np.int64)


def _stretch(z, c1, r1, c2, r2, rho):
    v = np.asarray(z, dtype=complex) - c1
    a = np.abs(v)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = c2 + r2 * (a / r1) ** rho * (v / a)
    return w


def annulus_map_eval(m: AnnulusMap, z, check: bool = True):
    """w = c2 + r2 (|z-c1|/r1)^rho (z-c1)/|z-c1|; arg about the centre preserved."""
    z_arr = np.asarray(z, dtype=complex)
    if check:
        a = np.abs(z_arr - m.c1)
        if np.any(a < m.r1 * (1 - DOMAIN_RTOL)) or np.any(a > m.R1 * (1 + DOMAIN_RTOL)):
            raise MapDomainError(f"point outside closed annulus {m.r1} <= |z - {m.c1}| <= {m.R1}")
    w = _stretch(z_arr, m.c1, m.r1, m.c2, m.r2, m.rho)
    return complex(w) if np.ndim(z) == 0 else w


# --------------------------------------------------------------------------
# per-pants map


@dataclass
class PantsMap:
    """Map from the source normalized pants (omega) to the target (omega~)."""

    k: int
    source: NormalizedPants
    target: NormalizedPants
    scaled: ScaledPants | None  # None when source and target coincide
    anchor: str  # "source", "target" or "equal"
    phi_plus: AnnulusMap | None = None
    phi_minus: AnnulusMap | None = None
    psi: AnnulusMap | None = None

    @property
    def identity(self) -> bool:
        return self.scaled is None

    # exact dilatations -------------------------------------------------
    @property
    def d_phi(self) -> float:
        return 0.0 if self.identity else self.phi_plus.d

    @property
    def d_psi(self) -> float:
        return 0.0 if self.identity else self.psi.d

    @property
    def d_bound(self) -> float:
        """d(Phi_k) <= d(phi_k) + d(psi_k), Eq. (eqn:asymtotic)."""
        return self.d_phi + self.d_psi

    # H: scaled-other -> anchor and its inverse ---------------------------
    def _H(self, y):
        sp = self.scaled
        xa, Rt = sp.anchor.x, sp.R_tilde
        w = y.copy()
        reg = np.zeros(y.shape, dtype=np.int64)
        for sign, m, bit in ((1, self.phi_plus, PHI_PLUS), (-1, self.phi_minus, PHI_MINUS)):
            sel = np.abs(y - sign * xa) < Rt
            if np.any(sel):
                w[sel] = _stretch(y[sel], m.c1, m.r1, m.c2, m.r2, m.rho)
                reg[sel] |= bit
        sel = np.abs(w) > sp.rho0
        if np.any(sel):
            p = self.psi
            w[sel] = _stretch(w[sel], p.c1, p.r1, p.c2, p.r2, p.rho)
            reg[sel] |= PSI
        return w, reg

    def _H_inv(self, w):
        sp = self.scaled
        xa, Rt = sp.anchor.x, sp.R_tilde
        y = w.copy()
        reg = np.zeros(w.shape, dtype=np.int64)
        sel = np.abs(w) > sp.rho0
        if np.any(sel):
            p = self.psi
            y[sel] = _stretch(w[sel], p.c2, p.r2, p.c1, p.r1, 1.0 / p.rho)
            reg[sel] |= PSI
        for sign, m, bit in ((1, self.phi_plus, PHI_PLUS), (-1, self.phi_minus, PHI_MINUS)):
            sel = np.abs(y - sign * xa) < Rt
            if np.any(sel):
                y[sel] = _stretch(y[sel], m.c2, m.r2, m.c1, m.r1, 1.0 / m.rho)
                reg[sel] |= bit
        return y, reg

    def _in_domain(self, u, p: NormalizedPants) -> np.ndarray:
        tol = DOMAIN_RTOL
        return ((np.abs(u) <= p.outer * (1 + tol))
                & (np.abs(u - p.x) >= p.r * (1 - tol))
                & (np.abs(u + p.x) >= p.r * (1 - tol)))

    def forward_with_regime(self, u):
        """Source normalized -> target normalized, with regime bits."""
        u = np.asarray(u, dtype=complex)
        if self.identity:
            return u.copy(), np.zeros(u.shape, dtype=np.int64)
        s = self.scaled.s
        if self.anchor == "source":
            y, reg = self._H_inv(u)
            return y / s, reg
        return self._H(s * u)

    def inverse_with_regime(self, u):
        """Target normalized -> source normalized."""
        u = np.asarray(u, dtype=complex)
        if self.identity:
            return u.copy(), np.zeros(u.shape, dtype=np.int64)
        s = self.scaled.s
        if self.anchor == "source":
            return self._H(s * u)
        y, reg = self._H_inv(u)
        return y / s, reg

    def forward(self, u, check: bool = True):
        arr = np.asarray(u, dtype=complex)
        if check and not np.all(self._in_domain(arr, self.source)):
            raise MapDomainError(f"point outside source pants at level {self.k}")
        w, _ = self.forward_with_regime(arr)
        return complex(w) if np.ndim(u) == 0 else w

    def inverse(self, u, check: bool = True):
        arr = np.asarray(u, dtype=complex)
        if check and not np.all(self._in_domain(arr, self.target)):
            raise MapDomainError(f"point outside target pants at level {self.k}")
        w, _ = self.inverse_with_regime(arr)
        return complex(w) if np.ndim(u) == 0 else w

    __call__ = forward

    def eval_with_regime(self, z):
        return self.forward_with_regime(z)

    def H(self, y):
        """Paper direction Phi_k: scaled other pants -> anchor pants."""
        if self.identity:
            return np.asarray(y, dtype=complex)
        return self._H(np.asarray(y, dtype=complex))[0]

    def phi(self, y):
        """phi_k alone (the Step-5 maps, identity off the R~ discs)."""
        y = np.asarray(y, dtype=complex)
        if self.identity:
            return y
        w = y.copy()
        for sign, m in ((1, self.phi_plus), (-1, self.phi_minus)):
            sel = np.abs(y - sign * self.scaled.anchor.x) < self.scaled.R_tilde
            w[sel] = _stretch(y[sel], m.c1, m.r1, m.c2, m.r2, m.rho)
        return w

    def psi_map(self, y):
        """psi_k alone (identity on |y| <= rho0)."""
        y = np.asarray(y, dtype=complex)
        if self.identity:
            return y
        w = y.copy()
        sel = np.abs(y) > self.scaled.rho0
        p = self.psi
        w[sel] = _stretch(y[sel], p.c1, p.r1, p.c2, p.r2, p.rho)
        return w

    def sample_domain(self, n: int = 20, margin: float = 0.0):
        """n x n grid over the source pants, kept at least ``margin`` from its circles."""
        p = self.source
        g = np.linspace(-p.outer, p.outer, n + 2)[1:-1]
        u = (g[None, :] + 1j * g[:, None]).ravel()
        keep = ((np.abs(u) < p.outer - margin)
                & (np.abs(u - p.x) > p.r + margin)
                & (np.abs(u + p.x) > p.r + margin))
        return u[keep], 2.0 * p.outer


def pants_map_from(src: NormalizedPants, tgt: NormalizedPants) -> PantsMap:
    k = src.k
    if src == tgt:
        return PantsMap(k, src, tgt, None, "equal")
    if src.x >= tgt.x:
        anchor, other, side = src, tgt, "source"
    else:
        anchor, other, side = tgt, src, "target"
    sp = scale_between(anchor, other, check=True)
    xa, Rt = anchor.x, sp.R_tilde
    phi_p = AnnulusMap.about(xa, sp.r_hat, Rt, anchor.r, Rt)
    phi_m = AnnulusMap.about(-xa, sp.r_hat, Rt, anchor.r, Rt)
    psi = AnnulusMap.about(0.0, sp.rho0, sp.outer, sp.rho0, anchor.outer)
    return PantsMap(k, src, tgt, sp, side, phi_p, phi_m, psi)


def build_pants_map(w: GapSequence, wt: GapSequence, delta: float | None, k: int,
                    mode: str = "fixed") -> PantsMap:
    """Phi_k for level k (uses q_{k+1} and q~_{k+1})."""
    return pants_map_from(normalize_pants(w, delta, k, mode), normalize_pants(wt, delta, k, mode))


# --------------------------------------------------------------------------
# glued global map


@dataclass
class PiecewiseQCMap:
    """Phi: X_E(omega) -> X_E(omega~), glued from per-pants maps.

    Identity outside the level-0 circle, PantsMap_k conjugated by the
    per-pants normalizations on each P_k^i (k < k_max), and the matching
    similarity inside the level-k_max circles (the "interior fill").
    """

    source: PantsDecomposition
    target: PantsDecomposition
    k_max: int
    pants_maps: list[PantsMap]
    is_identity: bool = False
    _mids_s: list = field(default_factory=list, repr=False)
    _mids_t: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._mids_s = [self.source.centers(k) for k in range(self.k_max + 1)]
        self._mids_t = [self.target.centers(k) for k in range(self.k_max + 1)]

    # point location ----------------------------------------------------
    def locate(self, z):
        """(level, 0-based index) of the pants containing each point.

        Level -1 means outside the level-0 circle; level k_max means inside a
        deepest circle.  Ties on a circle resolve to the parent pants.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        level = np.full(flat.shape, -1, dtype=np.int64)
        index = np.zeros(flat.shape, dtype=np.int64)
        rho = self.source.radii
        active = np.abs(flat - self._mids_s[0][0]) < rho[0]
        level[active] = 0
        for k in range(self.k_max):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            parent = index[idx]
            mids = self._mids_s[k][parent]
            child = 2 * parent + (flat[idx].real >= mids)
            inside = np.abs(flat[idx] - self._mids_s[k + 1][child]) < rho[k + 1]
            go = idx[inside]
            level[go] = k + 1
            index[go] = child[inside]
            active = np.zeros_like(active)
            active[go] = True
        return level.reshape(z.shape), index.reshape(z.shape)

    # evaluation -------------------------------------------------------
    def eval_in_pants(self, z, k: int, i: int, reverse: bool = False):
        """Evaluate the formula of pants (k, i) (1-based i) at z, ignoring location."""
        z = np.asarray(z, dtype=complex)
        if k == -1:
            return z.copy()
        src, tgt = (self.target, self.source) if reverse else (self.source, self.target)
        ms = src.centers(k)[i - 1]
        mt = tgt.centers(k)[i - 1]
        ls, lt = src.levels.lengths[k], tgt.levels.lengths[k]
        if k == self.k_max:
            return mt + (lt / ls) * (z - ms)
        pm = self.pants_maps[k]
        u = (z - ms) * (2.0 / ls)
        w, _ = (pm.inverse_with_regime(u) if reverse else pm.forward_with_regime(u))
        return mt + w * (0.5 * lt)

    def eval_with_regime(self, z):
        """Phi(z) and an integer regime id (pants + sub-map bits) per point."""
        z = np.asarray(z, dtype=complex)
        if self.is_identity:
            return z.copy(), np.zeros(z.shape, dtype=np.int64)
        flat = z.ravel()
        out = flat.copy()
        regime = np.zeros(flat.shape, dtype=np.int64)
        level, index = self.locate(flat)
        for k in range(self.k_max + 1):
            sel = np.nonzero(level == k)[0]
            if sel.size == 0:
                continue
            i = index[sel]
            ms, mt = self._mids_s[k][i], self._mids_t[k][i]
            ls, lt = self.source.levels.lengths[k], self.target.levels.lengths[k]
            if k == self.k_max:
                out[sel] = mt + (lt / ls) * (flat[sel] - ms)
                bits = np.zeros(sel.size, dtype=np.int64)
            else:
                w, bits = self.pants_maps[k].forward_with_regime((flat[sel] - ms) * (2.0 / ls))
                out[sel] = mt + w * (0.5 * lt)
            # unique id: 8 * (global pants number) + bits; outside -> 0
            regime[sel] = 8 * ((1 << k) + i) + bits
        return out.reshape(z.shape), regime.reshape(z.shape)

    def __call__(self, z):
        w, _ = self.eval_with_regime(z)
        return complex(w) if np.ndim(z) == 0 else w

    def pants_geometry(self, k: int, i: int):
        """(centre, outer radius, hole centres, hole radius) of source pants (k, i)."""
        c = self._mids_s[k][i - 1]
        rho = self.source.radii[k]
        if k >= self.k_max:
            return c, rho, np.empty(0), 0.0
        holes = self._mids_s[k + 1][[2 * i - 2, 2 * i - 1]]
        return c, rho, holes, self.source.radii[k + 1]

    def sample_pants(self, k: int, i: int, n: int = 20, margin_frac: float = 0.0):
        """Grid of n x n candidate points in source pants (k, i), world coordinates."""
        c, rho, holes, rh = self.pants_geometry(k, i)
        g = np.linspace(-rho, rho, n + 2)[1:-1]
        z = (c + g[None, :] + 1j * g[:, None]).ravel()
        m = margin_frac * 2 * rho
        keep = np.abs(z - c) < rho - m
        for h in holes:
            keep &= np.abs(z - h) > rh + m
        return z[keep], 2.0 * rho

    def reverse(self) -> "PiecewiseQCMap":
        return _assemble(self.target, self.source, self.k_max)


def _assemble(src: PantsDecomposition, tgt: PantsDecomposition, k_max: int) -> PiecewiseQCMap:
    maps = []
    for k in range(k_max):
        a = _pants_from_decomp(src, k)
        b = _pants_from_decomp(tgt, k)
        maps.append(pants_map_from(a, b))
    same = (np.array_equal(src.levels.q[1:k_max + 1], tgt.levels.q[1:k_max + 1])
            and np.array_equal(src.t[:k_max + 1], tgt.t[:k_max + 1]))
    return PiecewiseQCMap(src, tgt, k_max, maps, is_identity=same)


def _pants_from_decomp(dec: PantsDecomposition, k: int) -> NormalizedPants:
    q = float(dec.levels.q[k + 1])
    t0, t1 = float(dec.t[k]), float(dec.t[k + 1])
    x = 0.5 * (1.0 + q)
    r = 0.5 * (1.0 + t1) * (1.0 - q)
    return NormalizedPants(k, q, t0, t1, 1.0 + t0, x, r)


def build_global_map(w: GapSequence, wt: GapSequence, delta: float, k_max: int) -> PiecewiseQCMap:
    src = build_decomposition(build_levels(w, k_max), delta)
    tgt = build_decomposition(build_levels(wt, k_max), delta)
    if src.radii[0] != tgt.radii[0]:
        raise GeometryError("level-0 circles differ; a shared delta is required")
    return _assemble(src, tgt, k_max)


# --------------------------------------------------------------------------
# dilatation measurement


@dataclass(frozen=True)
class DilatationSample:
    max_K: float
    mean_K: float
    count: int
    rejected: int  # stencils that straddled a seam
    argmax: complex | None = None


def _derivs(f, z, h):
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return fx, fy


def _mu(fx, fy):
    dz = 0.5 * (fx - 1j * fy)
    dzb = 0.5 * (fx + 1j * fy)
    return dzb / dz


def measure_dilatation(phi, region=None, grid_step: float | None = None, n: int = 20,
                       rel_step: float = 1e-5) -> DilatationSample:
    """Max/mean K_est = (1+|mu|)/(1-|mu|) from central differences.

    ``phi`` is anything with ``eval_with_regime`` (AnnulusMap, PantsMap,
    PiecewiseQCMap).  ``region`` is a (level, 1-based index) pants id for a
    PiecewiseQCMap, a bounding box ``(x0, x1, y0, y1)``, an explicit array
    of points, or None (PantsMap: its source pants; AnnulusMap: the annulus).
    ``grid_step`` is the finite-difference step; by default ``rel_step``
    times the local diameter.  Stencils whose five points do not share one
    regime (pants and sub-map) are rejected so no difference straddles a seam.
    """
    pts, diam = _region_points(phi, region, n)
    h = grid_step if grid_step is not None else rel_step * diam
    if h <= 0:
        raise ValueError("grid_step must be positive")

    def f(z):
        return phi.eval_with_regime(z)[0]

    stencil = np.concatenate([pts, pts + 2 * h, pts - 2 * h, pts + 2j * h, pts - 2j * h])
    _, reg = phi.eval_with_regime(stencil)
    reg = reg.reshape(5, -1)
    ok = np.all(reg == reg[0], axis=0)
    z = pts[ok]
    if z.size == 0:
        return DilatationSample(1.0, 1.0, 0, int((~ok).sum()))
    fx, fy = _derivs(f, z, h)
    mu = _mu(fx, fy)
    big = np.abs(mu) > 0.5
    if np.any(big):
        fx2, fy2 = _derivs(f, z[big], h / 2)
        mu[big] = _mu((4 * fx2 - fx[big]) / 3, (4 * fy2 - fy[big]) / 3)
    a = np.abs(mu)
    if np.any(~np.isfinite(a)) or np.any(a >= 1.0):
        bad = z[np.argmax(np.where(np.isfinite(a), a, np.inf))]
        raise DegenerateMapError(f"|mu| >= 1 near {bad}")
    K = (1 + a) / (1 - a)
    j = int(np.argmax(K))
    return DilatationSample(float(K[j]), float(K.mean()), int(z.size), int((~ok).sum()), complex(z[j]))


def _region_points(phi, region, n):
    if region is not None and not isinstance(region, tuple):
        pts = np.asarray(region, dtype=complex).ravel()
        span = np.ptp(pts.real) + np.ptp(pts.imag)
        return pts, float(span) if span > 0 else 1.0
    if isinstance(region, tuple) and len(region) == 2:
        if not isinstance(phi, PiecewiseQCMap):
            raise TypeError("pants ids need a PiecewiseQCMap")
        return phi.sample_pants(region[0], region[1], n)
    if isinstance(region, tuple) and len(region) == 4:
        x0, x1, y0, y1 = region
        gx = np.linspace(x0, x1, n)
        gy = np.linspace(y0, y1, n)
        return (gx[None, :] + 1j * gy[:, None]).ravel(), float(max(x1 - x0, y1 - y0))
    if isinstance(phi, PantsMap):
        return phi.sample_domain(n)
    if isinstance(phi, AnnulusMap):
        rr = np.exp(np.linspace(math.log(phi.r1), math.log(phi.R1), n + 2)[1:-1])
        th = np.linspace(0, 2 * np.pi, n, endpoint=False) + 0.1
        pts = phi.c1 + (rr[None, :] * np.exp(1j * th)[:, None]).ravel()
        return pts, 2.0 * phi.R1
    raise TypeError("region required for this map type")
