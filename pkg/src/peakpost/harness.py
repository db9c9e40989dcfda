"""Monte Carlo harness: replicate pipeline, experiment presets, CLI.

A replicate is a pure function of (config, base_seed, index): the noise comes
from counter-based generators keyed by the replicate index, so runs are
reproducible replicate-by-replicate, chunks can be farmed out to worker
processes in any order, and parallel output is byte-identical to serial.

Per replicate the pipeline samples the field, finds and refines local maxima,
applies the (possibly randomized) height test, and -- depending on the tasks
requested -- records conditional pivots at the truth, confidence intervals
and ellipsoids with coverage indicators, and the per-replicate counts behind
the error-rate criteria. Replicates where inference is impossible (degenerate
Hessians, failed matching) are discarded with a reason; a run fails loudly if
more than 1% of replicates are discarded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import detect, infer, metrics, randomized, theory
from .errors import (ConfigurationError, DegenerateHessianError, MatchingError,
                     NumericalError)
from .field import (NOISE_STREAM, OMEGA_STREAM, Grid, covariance_factor,
                    noise_draws)
from .model import (Bump, KernelSpec, SignalSpec, curvature_scales,
                    derivative_bundle, signal_values, true_peaks)
from .peaks import find_local_maxima, peak_hessian_inf
from .special import chi2_cdf, norm_logsf, norm_sf

CHUNK = 128

PIVOTS_SCHEMA = "peakpost.pivots/1"
COVERAGE_SCHEMA = "peakpost.coverage/1"
RATES_SCHEMA = "peakpost.rates/1"
FIELD_SCHEMA = "peakpost.field/1"

ALL_TASKS = ("pivots", "height-intervals", "ellipsoids", "rates")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment cell: a signal, thresholds, methods, and tasks."""
    name: str
    signal_kind: str = "centered-bump"   # centered-bump | nine-bumps | null
    mu0: float = 11.0
    length_scale: float = 0.15
    dimension: int = 2
    grid_n: int = 48
    half_width: float = 1.0
    v: float = 3.0
    alpha: float = 0.1
    u_mode: str = "explicit"             # explicit | tg
    u: float | None = None
    detect_alpha: float = 0.1
    gamma: float | None = None
    eps_constant: float = 6.0
    methods: tuple = ("standard",)
    tasks: tuple = ("pivots",)
    replicates: int = 2000
    base_seed: int = 20260814

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.signal_kind not in ("centered-bump", "nine-bumps", "null"):
            raise ConfigurationError(f"unknown signal kind {self.signal_kind!r}")
        if self.u_mode not in ("explicit", "tg"):
            raise ConfigurationError(f"unknown threshold mode {self.u_mode!r}")
        if self.u_mode == "explicit" and self.u is None:
            raise ConfigurationError("explicit threshold mode needs a value for u")
        unknown = set(self.tasks) - set(ALL_TASKS)
        if unknown:
            raise ConfigurationError(f"unknown tasks: {sorted(unknown)}")
        if any(m not in ("standard", "carve", "split") for m in self.methods):
            raise ConfigurationError("methods must be among standard/carve/split")
        if ("carve" in self.methods or "split" in self.methods) and not self.gamma:
            raise ConfigurationError("randomized methods need gamma > 0")


def build_signal(config: ExperimentConfig) -> SignalSpec:
    dom = np.array([[-config.half_width, config.half_width]] * config.dimension)
    if config.signal_kind == "null":
        return SignalSpec(bumps=(), domain=dom)
    if config.signal_kind == "centered-bump":
        bump = Bump(center=np.zeros(config.dimension), amplitude=config.mu0,
                    width=config.length_scale)
        return SignalSpec(bumps=(bump,), domain=dom)
    # nine-bumps: 3 x 3 lattice of compactly supported bumps, heights 3 .. 6
    if config.dimension != 2:
        raise ConfigurationError("the nine-bump signal is two-dimensional")
    coords = (-0.6, 0.0, 0.6)
    heights = np.linspace(3.0, 6.0, 9)
    bumps = []
    k = 0
    for x in coords:
        for y in coords:
            bumps.append(Bump(center=np.array([x, y]), amplitude=float(heights[k]),
                              width=0.1))
            k += 1
    return SignalSpec(bumps=tuple(bumps), domain=dom, tapered=True)


class RunSetup:
    """Everything shared by all replicates of one experiment cell."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.kernel = KernelSpec(length_scale=config.length_scale,
                                 dimension=config.dimension)
        self.bundle = derivative_bundle(self.kernel)
        self.grid = Grid(shape=(config.grid_n,) * config.dimension,
                         domain=np.array([[-config.half_width, config.half_width]]
                                         * config.dimension))
        self.factor = covariance_factor(self.kernel, self.grid)
        self.signal = build_signal(config)
        self.mu_vec = signal_values(self.signal, self.grid.points)
        self.true_peaks = true_peaks(self.signal)
        self.randomized = config.gamma is not None and (
            "carve" in config.methods or "split" in config.methods)
        scale = math.sqrt(1.0 + config.gamma) if self.randomized else 1.0
        self.noise_scale = scale
        if config.u_mode == "explicit":
            self.u_raw = float(config.u)
            self.v_raw = float(config.u)
        else:
            self.u_raw = scale * detect.tg_threshold(config.detect_alpha,
                                                     config.v, config.dimension)
            self.v_raw = scale * config.v
        if self.true_peaks:
            self.scales = curvature_scales(self.true_peaks, self.bundle,
                                           config.eps_constant)
            self.contexts = [theory.theory_context(self.signal, self.bundle, tp,
                                                   self.u_raw, self.scales)
                             for tp in self.true_peaks]
        else:
            self.scales = None
            self.contexts = []

    @property
    def eps_n(self) -> float:
        return self.scales.eps_n if self.scales else 0.0


@dataclass(frozen=True)
class ReplicateOutcome:
    index: int
    counts: dict
    pivots: dict
    covered: dict
    widths: dict
    discard_reason: str | None = None


def _in_ball(peak, center, radius) -> bool:
    return float(np.linalg.norm(peak.location - center)) <= radius


def _std_window(setup: RunSetup, ctx, peak) -> bool:
    lo, hi = ctx.height_window()
    return (_in_ball(peak, setup.true_peaks[0].location, setup.scales.eps_n)
            and lo < peak.height <= hi)


def _sel_window(setup: RunSetup, ctx, peak) -> bool:
    gamma = setup.config.gamma
    eps_gamma = math.sqrt(1.0 + gamma) * setup.scales.eps_n
    lo, hi = ctx.height_window()
    return (_in_ball(peak, setup.true_peaks[0].location, eps_gamma)
            and lo < peak.height <= hi)


def _full_gamma_window(setup: RunSetup, ctx, peak) -> bool:
    ug = ctx.u_bar_gamma(setup.config.gamma)
    return (_in_ball(peak, setup.true_peaks[0].location, setup.scales.eps_n)
            and abs(peak.height - ug) <= ctx.Delta_n)


def _height_pivots(height, u, mu, neg_hessian, lambda_mat) -> dict:
    out = {"height-tg": infer.tg_pivot(height, u, mu, neg_hessian, lambda_mat)}
    out["height-noshift"] = float(math.exp(norm_logsf(height - mu) - norm_logsf(u - mu)))
    out["height-naive"] = float(norm_sf(height - mu))
    return out


def _quad_pivot(h, precision, d) -> float:
    return chi2_cdf(float(h @ precision @ h), d)


def analyze_replicate(setup: RunSetup, index: int, y: np.ndarray,
                      omega: np.ndarray | None) -> ReplicateOutcome:
    cfg = setup.config
    counts, pivots, covered, widths = {}, {}, {}, {}

    def outcome(reason=None):
        return ReplicateOutcome(index=index, counts=counts, pivots=pivots,
                                covered=covered, widths=widths,
                                discard_reason=reason)

    peaks_full = find_local_maxima(setup.grid, y)
    if setup.randomized:
        gamma = cfg.gamma
        y_sel = y + math.sqrt(gamma) * omega
        y_inf = y - omega / math.sqrt(gamma)
        peaks_sel = find_local_maxima(setup.grid, y_sel)
        det_peaks = peaks_sel
    else:
        y_sel = y_inf = None
        peaks_sel = None
        det_peaks = peaks_full

    prethresholded = detect.prethreshold(det_peaks, setup.v_raw)
    discoveries = [p for p in prethresholded if p.height > setup.u_raw]
    counts["prethresholded"] = len(prethresholded)
    counts["discoveries"] = len(discoveries)

    lam = setup.bundle.lambda_mat

    if "rates" in cfg.tasks:
        labels = metrics.label_peaks(discoveries, setup.true_peaks, setup.signal,
                                     setup.eps_n)
        counts["null-discoveries"] = sum(1 for l in labels if l.label == "null-region")
        counts["eps-inconsistent"] = sum(1 for l in labels
                                         if l.label != "epsilon-consistent")
        for j, tp in enumerate(setup.true_peaks):
            counts[f"peak-{j}-discovered"] = int(any(
                l.label == "epsilon-consistent" and l.nearest_true == j
                for l in labels))
        if setup.true_peaks and "standard" in cfg.methods and not setup.randomized:
            mis_h = mis_l = 0
            for p, lab in zip(discoveries, labels):
                if p.degenerate:
                    return outcome("degenerate-discovery")
                tp = setup.true_peaks[lab.nearest_true]
                try:
                    lo, hi = infer.height_interval(p.height, setup.u_raw,
                                                   cfg.alpha, p.neg_hessian, lam)
                    ell = infer.location_ellipsoid(p.location, p.neg_hessian,
                                                   lam, cfg.alpha)
                except (DegenerateHessianError, NumericalError) as err:
                    return outcome(f"discovery-inference: {err}")
                mis_h += int(not lo <= tp.height <= hi)
                mis_l += int(not ell.contains(tp.location))
            counts["miscovered-height"] = mis_h
            counts["miscovered-location"] = mis_l

    conditional = (len(setup.true_peaks) == 1
                   and any(t in cfg.tasks for t in
                           ("pivots", "height-intervals", "ellipsoids")))
    if not conditional:
        return outcome()

    tp = setup.true_peaks[0]
    ctx = setup.contexts[0]
    want_intervals = "height-intervals" in cfg.tasks
    want_ellipsoids = "ellipsoids" in cfg.tasks
    want_pivots = "pivots" in cfg.tasks

    if "standard" in cfg.methods:
        window = [p for p in peaks_full if _std_window(setup, ctx, p)]
        counts["window-count"] = len(window)
        counts["conditioned-standard"] = int(len(window) == 1)
        if len(window) == 1:
            p = window[0]
            if p.degenerate:
                return outcome("degenerate-window-peak")
            h = p.location - tp.location
            if want_pivots:
                pivots["standard/height-tg-oracle"] = infer.tg_pivot(
                    p.height, setup.u_raw, tp.height, ctx.h_bar, lam)
                for k, val in _height_pivots(p.height, setup.u_raw, tp.height,
                                             p.neg_hessian, lam).items():
                    pivots[f"standard/{k}"] = val
                d = cfg.dimension
                pivots["standard/loc-goldilocks-oracle"] = _quad_pivot(h, ctx.g_bar, d)
                pivots["standard/loc-marginal-oracle"] = _quad_pivot(h, ctx.a_lam_a, d)
                pivots["standard/loc-sandwich-oracle"] = _quad_pivot(h, ctx.h_lam_h, d)
                pivots["standard/loc-plugin"] = infer.wald_pivot(
                    p.location, tp.location, p.neg_hessian, lam)
            try:
                if want_intervals:
                    lo, hi = infer.height_interval(p.height, setup.u_raw,
                                                   cfg.alpha, p.neg_hessian, lam)
                    covered["standard/height"] = bool(lo <= tp.height <= hi)
                    widths["standard/height"] = hi - lo
                if want_ellipsoids:
                    ell = infer.location_ellipsoid(p.location, p.neg_hessian,
                                                   lam, cfg.alpha)
                    covered["standard/location"] = ell.contains(tp.location)
                    widths["standard/location"] = ell.width
            except (DegenerateHessianError, NumericalError) as err:
                return outcome(f"standard-inference: {err}")

    if setup.randomized:
        gamma = cfg.gamma
        sel_window = [p for p in peaks_sel if _sel_window(setup, ctx, p)]
        sel_ok = len(sel_window) == 1
        counts["conditioned-sel"] = int(sel_ok)
        full_window = [p for p in peaks_full if _full_gamma_window(setup, ctx, p)]
        carve_ok = sel_ok and len(full_window) == 1
        counts["conditioned-carve"] = int(carve_ok and "carve" in cfg.methods)
        counts["conditioned-split"] = int(sel_ok and "split" in cfg.methods)

        if "carve" in cfg.methods and carve_ok:
            try:
                hat = randomized.match_nearest_peak(
                    peaks_full, sel_window[0].location,
                    randomized.carve_match_bound(setup.scales.eps_n, gamma))
                if hat.degenerate:
                    raise DegenerateHessianError("matched full-data peak degenerate")
                hinf = peak_hessian_inf(setup.grid, y_inf, hat.location)
                carve_ctx = randomized.CarveContext(
                    gamma=gamma, u=setup.u_raw, sel_peak=sel_window[0],
                    full_peak=hat, neg_hessian_inf=hinf, lambda_mat=lam)
                if want_pivots:
                    pivots["carve/height-soft"] = carve_ctx.height_pivot(tp.height)
                    pivots["carve/loc-wald"] = carve_ctx.location_pivot(tp.location)
                if want_intervals:
                    lo, hi = carve_ctx.height_interval(cfg.alpha)
                    covered["carve/height"] = bool(lo <= tp.height <= hi)
                    widths["carve/height"] = hi - lo
                if want_ellipsoids:
                    ell = carve_ctx.location_ellipsoid(cfg.alpha)
                    covered["carve/location"] = ell.contains(tp.location)
                    widths["carve/location"] = ell.width
            except (MatchingError, DegenerateHessianError, NumericalError) as err:
                return outcome(f"carve: {err}")

        if "split" in cfg.methods and sel_ok:
            try:
                peaks_inf = find_local_maxima(setup.grid, y_inf)
                tilde = randomized.match_nearest_peak(
                    peaks_inf, sel_window[0].location,
                    randomized.split_match_bound(setup.scales.eps_n, gamma))
                if tilde.degenerate:
                    raise DegenerateHessianError("matched inference peak degenerate")
                if want_pivots:
                    pivots["split/height-tg"] = randomized.split_height_pivot(
                        tilde.height, tp.height, gamma, tilde.neg_hessian, lam)
                    ell0 = randomized.split_location_ellipsoid(
                        tilde.location, tilde.neg_hessian, lam, cfg.alpha, gamma)
                    hh = tp.location - tilde.location
                    pivots["split/loc-wald"] = chi2_cdf(
                        float(hh @ ell0.precision @ hh), cfg.dimension)
                if want_intervals:
                    lo, hi = randomized.split_height_interval(
                        tilde.height, cfg.alpha, gamma, tilde.neg_hessian, lam)
                    covered["split/height"] = bool(lo <= tp.height <= hi)
                    widths["split/height"] = hi - lo
                if want_ellipsoids:
                    ell = randomized.split_location_ellipsoid(
                        tilde.location, tilde.neg_hessian, lam, cfg.alpha, gamma)
                    covered["split/location"] = ell.contains(tp.location)
                    widths["split/location"] = ell.width
            except (MatchingError, DegenerateHessianError, NumericalError) as err:
                return outcome(f"split: {err}")

    return outcome()


def run_replicate(config: ExperimentConfig, index: int,
                  setup: RunSetup | None = None) -> ReplicateOutcome:
    """One replicate, regenerated in isolation (deterministic in index)."""
    if setup is None:
        setup = RunSetup(config)
    n = setup.grid.size
    z = noise_draws(config.base_seed, index, NOISE_STREAM, n)
    y = setup.mu_vec + setup.factor.factor @ z
    omega = None
    if setup.randomized:
        omega = setup.factor.factor @ noise_draws(config.base_seed, index,
                                                  OMEGA_STREAM, n)
    return analyze_replicate(setup, index, y, omega)


def _run_chunk(setup: RunSetup, indices) -> list:
    """A contiguous chunk of replicates; the field draws share one GEMM."""
    cfg = setup.config
    n = setup.grid.size
    z = np.column_stack([noise_draws(cfg.base_seed, i, NOISE_STREAM, n)
                         for i in indices])
    fields = setup.mu_vec[:, None] + setup.factor.factor @ z
    omegas = None
    if setup.randomized:
        zw = np.column_stack([noise_draws(cfg.base_seed, i, OMEGA_STREAM, n)
                              for i in indices])
        omegas = setup.factor.factor @ zw
    out = []
    for k, i in enumerate(indices):
        omega = omegas[:, k] if omegas is not None else None
        out.append(analyze_replicate(setup, i, fields[:, k], omega))
    return out


_WORKER_SETUP = None


def _worker_init(config: ExperimentConfig):
    global _WORKER_SETUP
    _WORKER_SETUP = RunSetup(config)


def _worker_chunk(indices):
    return _run_chunk(_WORKER_SETUP, indices)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    outcomes: list
    discarded: int

    @property
    def kept(self) -> list:
        return [o for o in self.outcomes if o.discard_reason is None]

    def pivot_values(self, key: str) -> np.ndarray:
        return np.array([o.pivots[key] for o in self.kept if key in o.pivots])

    def count_array(self, key: str) -> np.ndarray:
        return np.array([o.counts.get(key, 0) for o in self.kept], dtype=float)

    def coverage(self, key: str) -> metrics.CoverageEstimate:
        vals = [o.covered[key] for o in self.kept if key in o.covered]
        return metrics.conditional_coverage(vals)

    def widths_array(self, key: str) -> np.ndarray:
        return np.array([o.widths[key] for o in self.kept if key in o.widths])

    def rate(self, criterion: str) -> metrics.RateEstimate:
        den = self.count_array("prethresholded")
        if criterion == "null-pcer":
            return metrics.estimate_null_pcer(self.count_array("null-discoveries"), den)
        if criterion == "eps-pcer":
            return metrics.estimate_eps_pcer(self.count_array("eps-inconsistent"), den)
        if criterion == "pcmr-height":
            return metrics.estimate_pcmr(self.count_array("miscovered-height"), den)
        if criterion == "pcmr-location":
            return metrics.estimate_pcmr(self.count_array("miscovered-location"), den)
        raise ConfigurationError(f"unknown rate criterion {criterion!r}")

    # ---- CSV rows -------------------------------------------------------
    def pivot_rows(self):
        for o in self.kept:
            for key in sorted(o.pivots):
                method, statistic = key.split("/", 1)
                yield (self.config.name, method, statistic, o.index,
                       f"{o.pivots[key]:.12g}")

    def coverage_rows(self):
        keys = sorted({k for o in self.kept for k in o.covered})
        for key in keys:
            method, target = key.split("/", 1)
            est = self.coverage(key)
            w = self.widths_array(key)
            mean_w = float(w.mean()) if w.size else math.nan
            se_w = float(w.std(ddof=1) / math.sqrt(w.size)) if w.size > 1 else math.nan
            yield (self.config.name, method, target, est.n,
                   f"{est.value:.6f}", f"{est.se:.6f}",
                   f"{mean_w:.6f}", f"{se_w:.6f}")

    def rate_rows(self):
        available = {"null-pcer", "eps-pcer"}
        if any("miscovered-height" in o.counts for o in self.kept):
            available |= {"pcmr-height", "pcmr-location"}
        if "rates" not in self.config.tasks:
            available = set()
        for criterion in sorted(available):
            est = self.rate(criterion)
            yield (self.config.name, criterion, f"{est.value:.6f}",
                   f"{est.se:.6f}", f"{est.numerator:.0f}",
                   f"{est.denominator:.0f}", est.replicates)
        for key in sorted({k for o in self.kept for k in o.counts
                           if k.startswith("conditioned-") or k == "window-count"
                           or k.startswith("peak-")}):
            arr = self.count_array(key)
            if arr.size == 0:
                continue
            mean = float(arr.mean())
            se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.nan
            yield (self.config.name, key, f"{mean:.6f}", f"{se:.6f}",
                   f"{arr.sum():.0f}", f"{arr.size:.0f}", arr.size)


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   setup: RunSetup | None = None) -> ExperimentResult:
    """All replicates of one cell; fails if more than 1% are discarded."""
    chunks = [range(s, min(s + CHUNK, config.replicates))
              for s in range(0, config.replicates, CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_worker_init,
                                 initargs=(config,)) as pool:
            results = list(pool.map(_worker_chunk, chunks))
    else:
        if setup is None:
            setup = RunSetup(config)
        results = [_run_chunk(setup, c) for c in chunks]
    outcomes = [o for chunk in results for o in chunk]
    discarded = sum(1 for o in outcomes if o.discard_reason is not None)
    if config.replicates and discarded / config.replicates > 0.01:
        reasons = sorted({o.discard_reason for o in outcomes
                          if o.discard_reason is not None})
        raise RuntimeError(
            f"run {config.name}: {discarded}/{config.replicates} replicates "
            f"discarded (>1%); reasons: {reasons}")
    return ExperimentResult(config=config, outcomes=outcomes, discarded=discarded)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def single_peak_config(mu0: float, u: float, *, name=None, gamma=None,
                       methods=("standard",), tasks=("pivots",),
                       replicates=2000, seed=20260814, alpha=0.1) -> ExperimentConfig:
    label = name or f"bump-mu{mu0:g}-u{u:g}" + (f"-g{gamma:g}" if gamma else "")
    return ExperimentConfig(name=label, signal_kind="centered-bump", mu0=mu0,
                            u_mode="explicit", u=u, gamma=gamma, alpha=alpha,
                            methods=methods, tasks=tasks, replicates=replicates,
                            base_seed=seed)


def null_config(*, replicates=2000, seed=20260814, alpha=0.1, v=3.0) -> ExperimentConfig:
    return ExperimentConfig(name="null-field", signal_kind="null", v=v,
                            u_mode="tg", detect_alpha=alpha, alpha=alpha,
                            methods=("standard",), tasks=("rates",),
                            replicates=replicates, base_seed=seed)


def nine_bump_config(*, replicates=500, seed=20260814, alpha=0.1,
                     v=3.0) -> ExperimentConfig:
    return ExperimentConfig(name="nine-bumps", signal_kind="nine-bumps", v=v,
                            u_mode="tg", detect_alpha=alpha, alpha=alpha,
                            methods=("standard",),
                            tasks=("rates", "pivots", "height-intervals",
                                   "ellipsoids"),
                            replicates=replicates, base_seed=seed)


def preset_configs(preset: str, replicates: int | None = None,
                   seed: int = 20260814) -> list:
    """The experiment suites runnable from the CLI."""
    if preset == "exp1":
        cells = []
        for mu0 in (7.0, 11.0):
            for off in (-2.0, 0.0, 2.0):
                reps = replicates or 4000
                cells.append(single_peak_config(
                    mu0, mu0 + off, tasks=("pivots", "height-intervals",
                                           "ellipsoids"),
                    replicates=reps, seed=seed, alpha=0.1))
        return cells
    if preset == "exp2":
        cells = []
        for mu0 in (7.0, 11.0):
            for off in (-2.0, 0.0, 2.0):
                reps = replicates or 4000
                cells.append(single_peak_config(
                    mu0, mu0 + off, gamma=1.0,
                    methods=("standard", "carve", "split"),
                    tasks=("pivots", "height-intervals", "ellipsoids"),
                    replicates=reps, seed=seed, alpha=0.1))
        return cells
    if preset == "exp3":
        return [nine_bump_config(replicates=replicates or 500, seed=seed)]
    if preset == "null":
        return [null_config(replicates=replicates or 2000, seed=seed)]
    raise ConfigurationError(f"unknown preset {preset!r}")


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _write_csv(path, schema: str, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_outputs(results, out_dir):
    import os
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(os.path.join(out_dir, "pivots.csv"), PIVOTS_SCHEMA,
               ("experiment", "method", "statistic", "replicate", "value"),
               (r for res in results for r in res.pivot_rows()))
    _write_csv(os.path.join(out_dir, "coverage.csv"), COVERAGE_SCHEMA,
               ("experiment", "method", "target", "n", "coverage", "se",
                "mean_width", "se_width"),
               (r for res in results for r in res.coverage_rows()))
    _write_csv(os.path.join(out_dir, "rates.csv"), RATES_SCHEMA,
               ("experiment", "criterion", "value", "se", "numerator",
                "denominator", "replicates"),
               (r for res in results for r in res.rate_rows()))


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _golden_lines():
    """Reference values of the analytic quantities (12 significant digits)."""
    kernel = KernelSpec(length_scale=0.15, dimension=2)
    bundle = derivative_bundle(kernel)
    lines = []

    def emit(label, value):
        lines.append(f"{label} = {value:.12g}")

    emit("u_tg(alpha=0.1, v=3, d=2)", detect.tg_threshold(0.1, 3.0, 2))
    emit("tg_survival(3.5, v=3, d=1)", detect.tg_survival(3.5, 3.0, 1))
    emit("chi2_quantile(d=2, p=0.2)", infer.chi2_quantile(2, 0.2))
    emit("lambda[0,0] (l=0.15)", bundle.lambda_mat[0, 0])
    emit("null_marginal_intensity(v=3, lambda=1, d=1)",
         theory.null_marginal_intensity(3.0, np.eye(1), 1))
    for mu0, u in ((8.0, 8.0), (11.0, 13.0), (5.0, 7.0)):
        cfg = single_peak_config(mu0, u, replicates=1)
        setup = RunSetup(cfg)
        ctx = setup.contexts[0]
        emit(f"expected_true_discoveries(mu0={mu0:g}, u={u:g})",
             theory.expected_true_discoveries(ctx))
        emit(f"power_approx(mu0={mu0:g}, u={u:g})", theory.power_approx(ctx))
    cfg = single_peak_config(8.0, 8.0, replicates=1)
    ctx = RunSetup(cfg).contexts[0]
    emit("height_density(y=9; mu0=8, u=8)", theory.approx_height_density(ctx, 9.0))
    emit("carve_height_density(y=9; mu0=8, u=8, gamma=1)",
         theory.carve_height_density(ctx, 9.0, 1.0))
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="peakpost",
        description="Monte Carlo harness for post-selection peak inference "
                    "on smooth Gaussian random fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="draw one field and write it as CSV")
    sim.add_argument("--seed", type=int, default=20260814)
    sim.add_argument("--replicate", type=int, default=0)
    sim.add_argument("--mu0", type=float, default=11.0)
    sim.add_argument("--grid-n", type=int, default=48)
    sim.add_argument("--out", required=True)

    exp = sub.add_parser("experiment", help="run an experiment preset")
    exp.add_argument("preset", choices=("exp1", "exp2", "exp3", "null", "custom"))
    exp.add_argument("--config", help="JSON config file (custom preset)")
    exp.add_argument("--seed", type=int, default=20260814)
    exp.add_argument("--reps", type=int, default=None)
    exp.add_argument("--threads", type=int, default=1)
    exp.add_argument("--out", required=True)

    sub.add_parser("theory", help="print reference analytic values")

    args = parser.parse_args(argv)

    if args.command == "theory":
        for line in _golden_lines():
            print(line)
        return 0

    if args.command == "simulate":
        cfg = single_peak_config(args.mu0, args.mu0, replicates=1, seed=args.seed)
        cfg = replace(cfg, grid_n=args.grid_n)
        setup = RunSetup(cfg)
        z = noise_draws(args.seed, args.replicate, NOISE_STREAM, setup.grid.size)
        values = setup.mu_vec + setup.factor.factor @ z
        import os
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "field.csv")
        coords = setup.grid.points
        _write_csv(path, FIELD_SCHEMA,
                   tuple(f"t{k}" for k in range(cfg.dimension)) + ("mu", "value"),
                   ((*(f"{c:.10g}" for c in coords[i]),
                     f"{setup.mu_vec[i]:.10g}", f"{values[i]:.10g}")
                    for i in range(setup.grid.size)))
        print(f"wrote {path}")
        return 0

    if args.preset == "custom":
        if not args.config:
            parser.error("custom preset requires --config")
        with open(args.config) as fh:
            raw = json.load(fh)
        raw.setdefault("base_seed", args.seed)
        if args.reps:
            raw["replicates"] = args.reps
        configs = [ExperimentConfig(**raw)]
    else:
        configs = preset_configs(args.preset, replicates=args.reps, seed=args.seed)

    results = []
    for cfg in configs:
        print(f"running {cfg.name} ({cfg.replicates} replicates)...",
              file=sys.stderr)
        results.append(run_experiment(cfg, threads=args.threads))
    write_outputs(results, args.out)
    print(f"wrote pivots.csv, coverage.csv, rates.csv to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
