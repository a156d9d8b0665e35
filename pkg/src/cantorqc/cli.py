"""``cantor-qc`` command line.

Exit status: 0 success, 1 a check failed (budget exceeded, decomposition
failure, ...), 2 usage error (bad flags, unknown sequence spec, depth
overflow, unreadable files).

Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines;
explicit flags win over config values.  ``--format`` picks the output:
``csv`` (default, to ``--out`` or stdout), ``svg`` (figure to ``--out``) or
``report`` (text summary on stdout plus CSV and SVG written into the
directory ``--out``).
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import astala_bound, box_dimension, capacity_classify
from .construction import MAX_DEPTH, build_levels, check_gap_bound
from .emit import fmt, open_out, parse_config, parse_real, read_points, worker_count, write_csv
from .errors import CantorQCError, InvalidSequenceError, NoLowerBoundError
from .julia import (classify_quadratic, default_R0, fatou_exhaustion_census,
                    hyperbolicity_certificate, plan_matching)
from .ledger import build_ledger, geometric_example_budget, geometric_growth_fit
from .maps import build_global_map, measure_dilatation
from .obstructions import DEFAULT_D, find_obstruction
from .pants import build_decomposition
from .sequences import effective_delta, parse_sequence, sequence_distance

FORMATS = ("csv", "svg", "report")
SUBCOMMANDS = ("build", "metric", "pants", "map-eval", "map-check", "bound", "dim", "capacity",
               "obstruct", "julia-scan", "julia-exhaust", "plan", "example-geom")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    source: str | None = None
    target: str | None = None
    delta: float | None = None
    depth: int = 6
    horizon: int = 50
    eps: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    grid: int = 20
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        if not 0 <= self.depth <= MAX_DEPTH:
            raise UsageError(f"depth must lie in [0, {MAX_DEPTH}]")


# --------------------------------------------------------------------------
# argument parsing


def _eps_list(text: str) -> list[float]:
    return [parse_real(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _common(p: argparse.ArgumentParser, **defaults):
    p.add_argument("--config", help="flat key = value file (flags win)")
    p.add_argument("--depth", type=int, default=defaults.get("depth", 6))
    p.add_argument("--delta", type=parse_real, default=None, help="shared lower bound delta (p/q ok)")
    p.add_argument("--horizon", type=int, default=defaults.get("horizon", 50))
    p.add_argument("--eps", type=_eps_list, default=[0.2, 0.1, 0.05], help="comma list")
    p.add_argument("--grid", type=int, default=defaults.get("grid", 20))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (csv/svg) or directory (report)")
    p.add_argument("--format", choices=FORMATS, default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cantor-qc", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def add(name, help, nseq=0, **defaults):
        p = sub.add_parser(name, help=help)
        if nseq >= 1:
            p.add_argument("source", nargs="?", help="sequence spec, e.g. const:1/3")
        if nseq >= 2:
            p.add_argument("target", nargs="?", help="second sequence spec")
        _common(p, **defaults)
        return p

    add("build", "nested intervals E_k", 1)
    add("metric", "d(omega, omega~) of Eq. (1)", 2)
    p = add("pants", "circle family C_k^i", 1)
    p.add_argument("--mode", choices=("fixed", "geometric"), default="fixed")
    p = add("map-eval", "evaluate Phi at points read as x,y lines", 2)
    p.add_argument("--points", default="-", help="input file (default stdin)")
    p.add_argument("--reverse", action="store_true", help="evaluate the inverse map")
    p = add("map-check", "measured K of Phi against the ledger budget", 2)
    p.add_argument("--step", type=float, default=1e-4, help="FD step relative to pants diameter")
    add("bound", "Step 5-6 dilatation ledger", 2, horizon=20)
    add("dim", "box-counting dimension", 1, depth=14)
    add("capacity", "capacity criterion (eqn:Cap=0)", 1, horizon=40)
    p = add("obstruct", "Theorem III short-curve witness", 1, horizon=1000)
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--d", type=float, default=DEFAULT_D)
    p = add("julia-scan", "classify f_c and certify hyperbolicity", 0)
    p.add_argument("c", nargs="*", help="complex parameters, e.g. 5 or -1+0.2j")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--samples", type=int, default=2000)
    p = add("julia-exhaust", "Fatou exhaustion census", 0, depth=4, grid=512)
    p.add_argument("c", nargs="?", help="complex parameter")
    p.add_argument("--R0", type=float, default=None)
    p.add_argument("--no-refine", action="store_true", help="skip the 2N stability check")
    p = add("plan", "§3 matching plan", 0)
    p.add_argument("ell", nargs="?", type=int)
    p.add_argument("L", nargs="*", type=int)
    p = add("example-geom", "§6 a^-L study", 0, depth=20)
    p.add_argument("--a", type=parse_real, default=0.5)
    p.add_argument("--L-max", type=int, default=5)
    return ap


def parse_args(argv) -> argparse.Namespace:
    argv = list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, argv = pre.parse_known_args(argv)  # --config may sit before or after the subcommand
    ap = build_parser()
    cfg = {}
    if known.config:
        try:
            cfg = parse_config(known.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"config: {exc}")
        if not any(a in SUBCOMMANDS for a in argv) and "subcommand" in cfg:
            argv = [cfg["subcommand"]] + argv
        cfg.pop("subcommand", None)
    sub_action = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    # list-valued positionals and flags are applied after parsing
    late = {k: cfg.pop(k) for k in ("c", "L", "reverse", "no_refine") if k in cfg}
    for name, sp in sub_action.choices.items():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
    ns = ap.parse_args(argv)
    if ns.subcommand is None:
        ap.print_usage(sys.stderr)
        raise UsageError("a subcommand is required")
    dests = {a.dest for a in sub_action.choices[ns.subcommand]._actions}
    unknown = (set(cfg) | set(late)) - dests
    if unknown:
        raise UsageError(f"config keys not valid for {ns.subcommand}: {sorted(unknown)}")
    for key, value in late.items():
        current = getattr(ns, key)
        if key == "c" and not current:
            setattr(ns, key, value.split() if ns.subcommand == "julia-scan" else value)
        elif key == "L" and not current:
            setattr(ns, key, [int(t) for t in value.replace(",", " ").split()])
        elif key in ("reverse", "no_refine") and not current:
            setattr(ns, key, value.strip().lower() in ("1", "true", "yes", "on"))
    return ns


def config_from_namespace(ns: argparse.Namespace) -> RunConfig:
    base = {"subcommand", "source", "target", "delta", "depth", "horizon", "eps", "grid", "seed",
            "out", "format"}
    extra = {k: v for k, v in vars(ns).items() if k not in base and k != "config"}
    return RunConfig(ns.subcommand, getattr(ns, "source", None), getattr(ns, "target", None),
                     ns.delta, ns.depth, ns.horizon, ns.eps, ns.grid, ns.seed, ns.out, ns.format, extra)


# --------------------------------------------------------------------------
# helpers


def _seq(cfg: RunConfig, which: str):
    spec = getattr(cfg, which)
    if not spec:
        raise UsageError(f"{cfg.subcommand}: missing {which} sequence")
    return parse_sequence(spec)


def _delta(cfg: RunConfig, w, wt=None) -> float:
    if cfg.delta is not None:
        return cfg.delta
    try:
        return effective_delta(w, wt if wt is not None else w)
    except NoLowerBoundError as exc:
        raise UsageError(f"{exc}; pass --delta")


class Output:
    """Routes CSV / SVG / report artifacts according to --format and --out."""

    def __init__(self, cfg: RunConfig, stem: str):
        self.cfg, self.stem = cfg, stem
        self.lines: list[str] = []
        if cfg.format == "report":
            self.dir = Path(cfg.out or ".")
            self.dir.mkdir(parents=True, exist_ok=True)
        elif cfg.format == "svg" and not cfg.out:
            raise UsageError("--format svg needs --out FILE")

    def say(self, text: str = ""):
        self.lines.append(text)

    def csv(self, header, rows, name: str | None = None):
        f = self.cfg.format
        if f == "csv":
            with _Sink(self.cfg.out) as fh:
                write_csv(header, rows, fh)
        elif f == "report":
            path = self.dir / f"{name or self.stem}.csv"
            write_csv(header, rows, path)
            self.say(f"wrote {path}")

    def figure(self, draw, name: str | None = None):
        f = self.cfg.format
        if f == "svg":
            draw(self.cfg.out)
        elif f == "report":
            path = self.dir / f"{name or self.stem}.svg"
            draw(path)
            self.say(f"wrote {path}")

    def finish(self):
        """Summary lines go to stderr when the CSV itself occupies stdout."""
        if not self.lines:
            return
        to_err = self.cfg.format == "csv" and self.cfg.out in (None, "-")
        print("\n".join(self.lines), file=sys.stderr if to_err else sys.stdout)


class _Sink:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open_out(self.path)
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()
        else:
            self.fh.flush()


# --------------------------------------------------------------------------
# subcommands


def cmd_build(cfg: RunConfig) -> int:
    from .plotting import plot_levels

    w = _seq(cfg, "source")
    levels = build_levels(w, cfg.depth)
    out = Output(cfg, "levels")
    out.csv(("level", "kind", "index", "left", "length"), levels.rows())
    out.figure(lambda p: plot_levels(levels, p))
    status = 0
    if cfg.delta is not None:
        rep = check_gap_bound(levels, cfg.delta)
        out.say(f"gap bound: min |J|/|I| = {fmt(rep.min_ratio)} at level {rep.worst_level} "
                f"index {rep.worst_index}; required 2*delta = {fmt(rep.bound)}: "
                f"{'pass' if rep.passed else 'FAIL'}")
        status = 0 if rep.passed else 1
    out.say(f"depth {cfg.depth}: |I_k| = {fmt(float(levels.lengths[-1]))}, "
            f"closure error {fmt(levels.closure_error())}")
    out.finish()
    return status


def cmd_metric(cfg: RunConfig) -> int:
    w, wt = _seq(cfg, "source"), _seq(cfg, "target")
    d = sequence_distance(w, wt, cfg.horizon)
    print(f"{fmt(d.value)} {d.flag}")
    print(f"argmax n = {d.argmax}", file=sys.stderr)
    return 0


def cmd_pants(cfg: RunConfig) -> int:
    from .plotting import plot_decomposition

    w = _seq(cfg, "source")
    mode = cfg.extra.get("mode", "fixed")
    delta = _delta(cfg, w) if mode == "fixed" else None
    dec = build_decomposition(build_levels(w, cfg.depth), delta, mode)
    out = Output(cfg, "pants")
    out.csv(("level", "index", "center", "radius"), dec.rows())
    out.figure(lambda p: plot_decomposition(dec, p))
    m = dec.min_margin()
    if m is not None:
        out.say(f"min margin {fmt(m.relative)} |I_{m.level}| ({m.kind}, {m.pair})")
    out.finish()
    return 0


def _global_map(cfg: RunConfig):
    w, wt = _seq(cfg, "source"), _seq(cfg, "target")
    delta = _delta(cfg, w, wt)
    return w, wt, delta, build_global_map(w, wt, delta, cfg.depth)


def cmd_map_eval(cfg: RunConfig) -> int:
    _, _, _, phi = _global_map(cfg)
    if cfg.extra.get("reverse"):
        phi = phi.reverse()
    src = cfg.extra.get("points", "-")
    fh = sys.stdin if src in (None, "-") else open(src, encoding="utf-8")
    try:
        pts = np.array(read_points(fh), dtype=complex)
    finally:
        if fh is not sys.stdin:
            fh.close()
    w = phi(pts) if pts.size else pts
    rows = [(float(z.real), float(z.imag), float(v.real), float(v.imag)) for z, v in zip(pts, w)]
    with _Sink(cfg.out) as out:
        write_csv(("x", "y", "u", "v"), rows, out)
    return 0


def cmd_map_check(cfg: RunConfig) -> int:
    from .plotting import plot_map_overlay

    w, wt, delta, phi = _global_map(cfg)
    led = build_ledger(w, wt, delta, max(cfg.depth, 1))
    dist = sequence_distance(w, wt, max(cfg.horizon, cfg.depth + 1))
    budget = math.exp(led.C * dist.value)
    step = cfg.extra.get("step", 1e-4)
    jobs = [(k, i) for k in range(cfg.depth) for i in range(1, 2**k + 1)]

    def one(job):
        return job, measure_dilatation(phi, job, n=cfg.grid, rel_step=step)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, jobs))
    rows = []
    for k in range(cfg.depth):
        per = [r for (kk, _), r in results if kk == k]
        mx = max(r.max_K for r in per)
        mean = float(np.average([r.mean_K for r in per], weights=[max(r.count, 1) for r in per]))
        exact = math.exp(led.rows[k].exact_phi + led.rows[k].exact_psi)
        rows.append((k, mx, mean, sum(r.count for r in per), exact,
                     math.exp(led.rows[k].total), budget))
    worst = max((r[1] for r in rows), default=1.0)
    ok = worst <= budget * 1.01 and not led.violations()
    out = Output(cfg, "map_check")
    header = ("k", "max_K", "mean_K", "samples", "exact_K_bound", "ledger_K_bound", "budget_K")
    out.csv(header, rows)
    out.figure(lambda p: plot_map_overlay(phi, p))
    out.say(f"d(omega, omega~) = {fmt(dist.value)} ({dist.flag}); delta = {fmt(delta)}; "
            f"C(delta) = {fmt(led.C)}")
    out.say(f"measured max K = {fmt(worst)}  vs  budget exp(C d) = {fmt(budget)}: "
            f"{'ok' if ok else 'EXCEEDED'}")
    out.say("interior fill inside level-%d circles is the matching similarity (flagged)" % cfg.depth)
    out.finish()
    return 0 if ok else 1


def cmd_bound(cfg: RunConfig) -> int:
    from .plotting import plot_ledger

    w, wt = _seq(cfg, "source"), _seq(cfg, "target")
    delta = _delta(cfg, w, wt)
    led = build_ledger(w, wt, delta, cfg.horizon)
    out = Output(cfg, "ledger")
    out.csv(("k", "q_k", "qt_k", "step5", "step6", "total", "budget", "exact_phi", "exact_psi"),
            ((r.k, r.q, r.qt, r.step5, r.step6, r.total, r.budget, r.exact_phi, r.exact_psi)
             for r in led.rows))
    out.figure(lambda p: plot_ledger(led, p))
    out.say(f"A1 = {fmt(led.A1)}\nA2 = {fmt(led.A2)}\nC(delta) = {fmt(led.C)}")
    out.say(f"d(omega, omega~) = {fmt(led.distance.value)} ({led.distance.flag})")
    out.say(f"sup total = {fmt(led.sup_total)}  vs  budget C d = {fmt(led.budget)}")
    bad = led.violations()
    for b in bad:
        out.say("VIOLATION " + b)
    out.finish()
    return 1 if bad else 0


def cmd_dim(cfg: RunConfig) -> int:
    from .plotting import plot_dimension

    w = _seq(cfg, "source")
    est = box_dimension(build_levels(w, cfg.depth))
    out = Output(cfg, "dimension")
    out.csv(("scale", "count"), est.rows())
    out.figure(lambda p: plot_dimension(est, p))
    out.say(f"slope = {fmt(est.slope)} +- {fmt(est.half_width)} (levels {est.fit_levels}) {est.verdict}")
    out.finish()
    return 0


def cmd_capacity(cfg: RunConfig) -> int:
    w = _seq(cfg, "source")
    rep = capacity_classify(w, cfg.horizon)
    out = Output(cfg, "capacity")
    out.csv(("N", "S_N"), ((n, float(s)) for n, s in enumerate(rep.partial_sums, start=1)))
    lines = [f"verdict: {rep.verdict}", f"certificate: {rep.certificate}",
             f"S_{rep.N} = {fmt(rep.S_N)}"]
    if rep.tail_bound is not None:
        lines.append(f"tail bound: {fmt(rep.tail_bound)}")
    if rep.limit is not None:
        lines.append(f"closed-form limit: {fmt(rep.limit)}")
    for ln in lines:
        out.say(ln)
    out.finish()
    return 0


def cmd_obstruct(cfg: RunConfig) -> int:
    w = _seq(cfg, "source")
    K, d = cfg.extra.get("K", 2.0), cfg.extra.get("d", DEFAULT_D)
    wit = find_obstruction(w, K, d, cfg.horizon)
    if wit is None:
        print(f"verdict: no witness for K={fmt(K)}, d={fmt(d)} within horizon {cfg.horizon}")
        print(f"threshold d/K = {fmt(d / K)}")
    else:
        print("verdict: obstruction")
        print(f"n = {wit.n}\neps = {fmt(wit.eps)}\nlog r = {fmt(wit.log_r)}\nlog R = {fmt(wit.log_R)}")
        print(f"core length = {fmt(wit.length)}\nthreshold d/K = {fmt(wit.threshold)}")
        print(wit.chain())
    return 0


def _complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"bad complex parameter {text!r}")


def cmd_julia_scan(cfg: RunConfig) -> int:
    cs = cfg.extra.get("c") or []
    if not cs:
        raise UsageError("julia-scan needs at least one c")
    rows = []
    for t in cs:
        c = _complex(t)
        v = classify_quadratic(c, cfg.extra.get("max_iter", 500))
        h = hyperbolicity_certificate(c, cfg.extra.get("m", 1), cfg.extra.get("samples", 2000), cfg.seed)
        rows.append((fmt(c), v.verdict, v.escape_iter, v.escape_radius, h.m, h.min_derivative,
                     "pass" if h.passed else ("inapplicable" if h.verdict == "inapplicable" else "fail")))
    out = Output(cfg, "julia_scan")
    out.csv(("c", "verdict", "escape_iter", "escape_radius", "m", "min_abs_deriv", "certificate"), rows)
    out.finish()
    return 0


def cmd_julia_exhaust(cfg: RunConfig) -> int:
    from .plotting import plot_escape

    if not cfg.extra.get("c"):
        raise UsageError("julia-exhaust needs c")
    c = _complex(cfg.extra["c"])
    R0 = cfg.extra.get("R0")
    cen = fatou_exhaustion_census(c, cfg.depth, cfg.grid, R0, not cfg.extra.get("no_refine"))
    if cen.verdict == "inapplicable":
        print(f"c={c}: not cantor-hyperbolic; census inapplicable", file=sys.stderr)
        return 1
    out = Output(cfg, "census")
    out.csv(("k", "sublevel_components", "shell_components", "boundary_curves_list", "status"),
            (lv.row() for lv in cen.levels))
    out.figure(lambda p: plot_escape(c, cen.R0, cfg.depth, p))
    out.say(f"R0 = {fmt(cen.R0)}; trusted through k = {cen.stable_through()}")
    out.finish()
    return 0 if cen.stable_through() == cfg.depth else 1


def cmd_plan(cfg: RunConfig) -> int:
    ell, L = cfg.extra.get("ell"), cfg.extra.get("L") or []
    if ell is None:
        raise UsageError("plan needs l and the L list")
    try:
        plan = plan_matching(ell, L)
    except ValueError as exc:
        raise UsageError(str(exc))
    print("\n".join(plan.lines()))
    bad = plan.problems()
    for b in bad:
        print("INVARIANT FAILED: " + b)
    return 1 if bad else 0


def cmd_example_geom(cfg: RunConfig) -> int:
    from .plotting import plot_geometric_growth

    a, L_max, k_max = cfg.extra.get("a", 0.5), cfg.extra.get("L_max", 5), max(cfg.depth, 1)
    rows = []
    for L in range(0, L_max + 1):
        b = geometric_example_budget(a, L, k_max)
        for k in range(k_max):
            rows.append((L, k, float(b.d_phi[k]), float(b.d_psi[k]), float(b.totals[k]),
                         float(b.paper_bound[k])))
    fit = geometric_growth_fit(a, max(L_max, 1), k_max)
    out = Output(cfg, "example_geom")
    out.csv(("L", "k", "d_phi", "d_psi", "total", "paper_bound_delta_k"), rows)
    out.figure(lambda p: plot_geometric_growth(fit, p))
    for L, s in zip(fit.Ls, fit.sups):
        out.say(f"L={L}: sup_k d(Phi_k) = {fmt(float(s))}")
    out.say(f"fit: sup ~ {fmt(fit.C)} a^(-{fmt(fit.slope)} L); smallest C with sup <= C a^-L: "
            f"{fmt(fit.C_min)}")
    if len(fit.sups) >= 2:
        out.say(f"ratio L2/L1 = {fmt(float(fit.sups[1] / fit.sups[0]))} (limit 1/a = {fmt(1 / a)})")
    out.finish()
    return 0


COMMANDS = {
    "build": cmd_build, "metric": cmd_metric, "pants": cmd_pants, "map-eval": cmd_map_eval,
    "map-check": cmd_map_check, "bound": cmd_bound, "dim": cmd_dim, "capacity": cmd_capacity,
    "obstruct": cmd_obstruct, "julia-scan": cmd_julia_scan, "julia-exhaust": cmd_julia_exhaust,
    "plan": cmd_plan, "example-geom": cmd_example_geom,
}


def run(config: RunConfig) -> int:
    """Execute one subcommand; returns the exit status."""
    try:
        return COMMANDS[config.subcommand](config)
    except UsageError as exc:
        print(f"cantor-qc: error: {exc}", file=sys.stderr)
        return 2
    except (InvalidSequenceError, NoLowerBoundError, OSError) as exc:
        print(f"cantor-qc: error: {exc}", file=sys.stderr)
        return 2
    except CantorQCError as exc:
        print(f"cantor-qc: check failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"cantor-qc: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = parse_args(argv)
        cfg = config_from_namespace(ns)
    except UsageError as exc:
        print(f"cantor-qc: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
