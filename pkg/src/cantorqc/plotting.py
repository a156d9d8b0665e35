"""Presentation-only figures (matplotlib, Agg).  Deterministic SVG output:
no date metadata, fixed hash salt, one ``<g id="level-k">`` group per level.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PatchCollection  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

SVG_SALT = "cantorqc"

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "lines.linewidth": 0.8,
    "svg.hashsalt": SVG_SALT,
    "svg.fonttype": "none",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    meta = {"Date": None} if fmt == "svg" else ({"Software": None} if fmt == "png" else None)
    fig.savefig(path, format=fmt, metadata=meta, dpi=150)
    plt.close(fig)
    return path


def _figure(w=6.0, h=3.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(w, h))
    return fig, ax


def plot_levels(levels, path, max_level: int | None = None) -> Path:
    """Intervals of E_k drawn as bars, level k at height -k."""
    top = levels.depth if max_level is None else min(max_level, levels.depth)
    with plt.rc_context(STYLE):
        fig, ax = _figure(6.0, 0.4 * (top + 2))
        for k in range(top + 1):
            lefts, length = levels.intervals(k)
            segs = [[(a, -k), (a + length, -k)] for a in lefts]
            lc = LineCollection(segs, linewidths=4, colors="k")
            lc.set_gid(f"level-{k}")
            ax.add_collection(lc)
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-top - 0.5, 0.5)
        ax.set_yticks(-np.arange(top + 1), [str(k) for k in range(top + 1)])
        ax.set_ylabel("level k")
        ax.set_title(f"E_k for {levels.seq}")
        return _save(fig, path)


def _circle_layer(ax, centers, radius, gid, **kw):
    pc = PatchCollection([Circle((c, 0.0), radius) for c in centers], facecolor="none", **kw)
    pc.set_gid(gid)
    ax.add_collection(pc)
    return pc


def plot_decomposition(dec, path, max_level: int | None = None) -> Path:
    top = dec.depth if max_level is None else min(max_level, dec.depth)
    with plt.rc_context(STYLE):
        fig, ax = _figure(6.0, 4.0)
        cmap = plt.get_cmap("viridis")
        for k in range(top + 1):
            c, rho = dec.circles(k)
            _circle_layer(ax, c, rho, f"level-{k}", edgecolor=cmap(k / max(top, 1)), linewidth=0.6)
        ax.plot([0, 1], [0, 0], color="0.6", linewidth=0.4)
        r0 = dec.radii[0]
        ax.set_xlim(0.5 - 1.05 * r0, 0.5 + 1.05 * r0)
        ax.set_ylim(-1.05 * r0, 1.05 * r0)
        ax.set_aspect("equal")
        ax.set_title(f"pants circles, {dec.levels.seq}, mode={dec.mode}")
        return _save(fig, path)


def plot_map_overlay(phi, path, max_level: int = 3, samples: int = 256) -> Path:
    """Source circles, target circles and images of source circles under Phi."""
    top = min(max_level, phi.k_max)
    th = np.linspace(0, 2 * np.pi, samples)
    with plt.rc_context(STYLE):
        fig, ax = _figure(6.0, 4.0)
        for k in range(top + 1):
            cs, rs = phi.source.circles(k)
            ct, rt = phi.target.circles(k)
            _circle_layer(ax, cs, rs, f"source-level-{k}", edgecolor="tab:blue", linewidth=0.5)
            _circle_layer(ax, ct, rt, f"target-level-{k}", edgecolor="tab:red", linewidth=0.5,
                          linestyle="--")
            imgs = [phi(c + rs * np.exp(1j * th)) for c in cs]
            lc = LineCollection([np.c_[w.real, w.imag] for w in imgs], colors="k", linewidths=0.3)
            lc.set_gid(f"image-level-{k}")
            ax.add_collection(lc)
        r0 = phi.source.radii[0]
        ax.set_xlim(0.5 - 1.05 * r0, 0.5 + 1.05 * r0)
        ax.set_ylim(-1.05 * r0, 1.05 * r0)
        ax.set_aspect("equal")
        ax.set_title("source (blue), target (red dashed), Phi(source) (black)")
        return _save(fig, path)


def plot_ledger(ledger, path) -> Path:
    k = [r.k for r in ledger.rows]
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        ax.semilogy(k, [max(r.total, 1e-300) for r in ledger.rows], "o-", label="step5 + step6", ms=3)
        ex = [r.exact_phi + r.exact_psi for r in ledger.rows if r.exact_phi is not None]
        if ex:
            ax.semilogy(k, np.maximum(ex, 1e-300), "s-", label="exact d(phi)+d(psi)", ms=3)
        if ledger.budget > 0:
            ax.axhline(ledger.budget, color="k", linestyle=":", label="C(delta) d")
        ax.set_xlabel("level k")
        ax.set_ylabel("log-dilatation")
        ax.legend()
        return _save(fig, path)


def plot_dimension(est, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = _figure(4.0, 3.0)
        x = -est.log_scales
        y = np.log(est.counts)
        ax.plot(x, y, "o", ms=3)
        lo, hi = est.fit_levels
        ax.plot(x[lo:hi + 1], est.slope * (x[lo:hi + 1] - x[hi]) + y[hi], "-",
                label=f"slope {est.slope:.4f}")
        ax.set_xlabel("-log eps")
        ax.set_ylabel("log N(eps)")
        ax.legend()
        return _save(fig, path)


def plot_geometric_growth(fit, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = _figure(4.0, 3.0)
        ax.plot(fit.Ls, fit.sups, "o-", ms=3, label="sup_k d(Phi_k)")
        ax.plot(fit.Ls, fit.C_min * fit.a ** (-fit.Ls.astype(float)), ":", label="C a^-L")
        ax.set_xlabel("L")
        ax.set_ylabel("log-dilatation")
        ax.set_yscale("log")
        ax.legend()
        return _save(fig, path)


def plot_escape(c: complex, R0: float, k_max: int, path, n: int = 512) -> Path:
    """Raster of the escape index (shells are the level sets)."""
    from .julia import escape_raster

    esc = escape_raster(complex(c), 0j, 1.1 * R0, n, R0, k_max + 1)
    with plt.rc_context(STYLE):
        fig, ax = _figure(4.0, 4.0)
        h = 1.1 * R0
        im = ax.imshow(np.minimum(esc, k_max + 1), origin="lower", extent=(-h, h, -h, h),
                       cmap="magma", interpolation="nearest")
        im.set_gid("escape-index")
        ax.set_title(f"escape index, c={c}")
        fig.colorbar(im, ax=ax, shrink=0.8)
        return _save(fig, path)
