"""Analytic approximations to the law of peaks near a true peak.

Everything here is deterministic: given the signal curvature at a true peak,
the kernel derivative structure, and the selection threshold, these functions
evaluate the second-order accurate approximations to

* the joint intensity of (peak location offset, peak height) after selection,
* the expected number of selected peaks in the localization window,
* the marginal height density and the location density (given the height or
  unconditionally),
* the corresponding null quantities for a signal-free region, and
* the softly truncated height density after randomized selection.

The central matrices: A = -hess(mu), H = A + (ubar - mu) Lambda (the
deterministic curvature of a selected peak), and the precision
G = A Lambda^{-1} A + (ubar - mu) A, which satisfies
G = H Lambda^{-1} A and A Lambda^{-1} A <= G <= H Lambda^{-1} H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateHessianError, ModelError, ParameterError,
                     WindowError)
from .model import (CurvatureScales, DerivativeBundle, SignalSpec, TruePeak,
                    signal_third)
from .special import norm_pdf, norm_sf

PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TheoryContext:
    """Deterministic quantities at one true peak under threshold u."""
    mu: float
    u: float
    a_mat: np.ndarray
    lambda_mat: np.ndarray
    third: np.ndarray
    eps_n: float
    Delta_n: float

    def __post_init__(self):
        a = np.asarray(self.a_mat, dtype=float)
        lam = np.asarray(self.lambda_mat, dtype=float)
        object.__setattr__(self, "a_mat", 0.5 * (a + a.T))
        object.__setattr__(self, "lambda_mat", 0.5 * (lam + lam.T))
        object.__setattr__(self, "third", np.asarray(self.third, dtype=float))
        if np.linalg.eigvalsh(self.a_mat)[0] <= 0:
            raise ModelError("A = -hess(mu) must be positive definite at a true peak")
        if np.linalg.eigvalsh(self.lambda_mat)[0] <= 0:
            raise ModelError("Lambda must be positive definite")
        gap = self.g_bar - self.a_lam_a
        if np.linalg.eigvalsh(gap)[0] < -PSD_TOL:
            raise ModelError("precision ordering violated: G < A Lambda^-1 A")
        gap = self.h_lam_h - self.g_bar
        if np.linalg.eigvalsh(gap)[0] < -PSD_TOL:
            raise ModelError("precision ordering violated: H Lambda^-1 H < G")
        alt = self.h_bar @ np.linalg.solve(self.lambda_mat, self.a_mat)
        if np.max(np.abs(alt - self.g_bar)) > PSD_TOL * max(1.0, np.max(np.abs(self.g_bar))):
            raise ModelError("G != H Lambda^-1 A beyond tolerance")

    @property
    def dimension(self) -> int:
        return np.asarray(self.a_mat).shape[0]

    @property
    def u_bar(self) -> float:
        return max(self.u, self.mu)

    @property
    def h_bar(self) -> np.ndarray:
        return self.a_mat + (self.u_bar - self.mu) * self.lambda_mat

    @property
    def g_bar(self) -> np.ndarray:
        return self.a_lam_a + (self.u_bar - self.mu) * self.a_mat

    @property
    def a_lam_a(self) -> np.ndarray:
        return self.a_mat @ np.linalg.solve(self.lambda_mat, self.a_mat)

    @property
    def h_lam_h(self) -> np.ndarray:
        h = self.h_bar
        return h @ np.linalg.solve(self.lambda_mat, h)

    @property
    def trace_corr(self) -> float:
        """tr(H^{-1} Lambda), the height mean-shift scale."""
        return float(np.trace(np.linalg.solve(self.h_bar, self.lambda_mat)))

    def u_bar_gamma(self, gamma: float) -> float:
        """Deterministic full-data height limit after randomized selection."""
        if not gamma > 0:
            raise ParameterError("gamma must be positive")
        pi = gamma / (1.0 + gamma)
        return (1.0 - pi) * self.u_bar + pi * self.mu

    def height_window(self):
        """The conditioning interval for heights, (ubar +- Delta) cut to (u, inf)."""
        return max(self.u, self.u_bar - self.Delta_n), self.u_bar + self.Delta_n

    def in_window(self, h, y: float) -> bool:
        lo, hi = self.height_window()
        return (np.linalg.norm(np.asarray(h, dtype=float)) <= self.eps_n
                and lo < y <= hi and y > self.u)


def theory_context(signal: SignalSpec, bundle: DerivativeBundle, peak: TruePeak,
                   u: float, scales: CurvatureScales) -> TheoryContext:
    return TheoryContext(mu=peak.height, u=u, a_mat=peak.neg_hessian,
                         lambda_mat=bundle.lambda_mat,
                         third=signal_third(signal, peak.location),
                         eps_n=scales.eps_n, Delta_n=scales.Delta_n)


class IntensityValue(NamedTuple):
    value: float
    clamped: bool


def _t10(ctx: TheoryContext, h: np.ndarray) -> float:
    # tr(Hbar^{-1} Hdot(h)) with Hdot(h) = -third . h for a stationary kernel
    hdot = -np.tensordot(ctx.third, h, axes=([2], [0]))
    return float(np.trace(np.linalg.solve(ctx.h_bar, hdot)))


def _t30(ctx: TheoryContext, h: np.ndarray) -> float:
    # h' hess(mu) Lambda^{-1} third(h, h); hess(mu) = -A
    thh = np.tensordot(np.tensordot(ctx.third, h, axes=([2], [0])), h,
                       axes=([1], [0]))
    return float((-(ctx.a_mat @ h)) @ np.linalg.solve(ctx.lambda_mat, thh))


def approx_intensity(ctx: TheoryContext, h, y: float) -> IntensityValue:
    """Joint intensity of (location offset, height) of a selected peak.

    Only defined inside the localization window ||h|| <= eps_n,
    y in (ubar +- Delta) cut to (u, inf); outside it raises WindowError. The
    first-order correction bracket is clamped at zero (flagged) if the
    expansion turns negative at the window edge.
    """
    h = np.asarray(h, dtype=float)
    if not ctx.in_window(h, y):
        raise WindowError("(h, y) outside the localization window")
    d = ctx.dimension
    t01 = (y - ctx.u_bar) * ctx.trace_corr
    t21 = -0.5 * (y - ctx.u_bar) * float(h @ ctx.a_mat @ h)
    bracket = 1.0 + t01 + _t10(ctx, h) - 0.5 * _t30(ctx, h) + t21
    clamped = bracket < 0.0
    if clamped:
        bracket = 0.0
    norm = math.sqrt((2.0 * math.pi) ** (d + 1) * np.linalg.det(ctx.lambda_mat))
    value = (np.linalg.det(ctx.h_bar) * bracket / norm
             * math.exp(-0.5 * (y - ctx.mu) ** 2)
             * math.exp(-0.5 * float(h @ ctx.g_bar @ h)))
    return IntensityValue(value=float(value), clamped=clamped)


def expected_true_discoveries(ctx: TheoryContext) -> float:
    """Approximate E[# selected peaks in the window around the true peak]."""
    ratio = np.linalg.det(ctx.h_bar) / np.linalg.det(ctx.a_mat)
    shift = ctx.u_bar - ctx.mu
    return float(math.sqrt(ratio)
                 * math.exp(-0.5 * shift * ctx.trace_corr)
                 * norm_sf(ctx.u - ctx.mu - 0.5 * ctx.trace_corr))


def power_approx(ctx: TheoryContext) -> float:
    """Leading approximation to P(the true peak is discovered)."""
    return float(norm_sf(ctx.u - ctx.mu - 0.5 * ctx.trace_corr))


def approx_height_density(ctx: TheoryContext, y) -> np.ndarray | float:
    """Marginal density of the selected peak height (truncated Gaussian)."""
    y_arr = np.asarray(y, dtype=float)
    c = 0.5 * ctx.trace_corr
    den = norm_sf(ctx.u - ctx.mu - c)
    out = np.where(y_arr > ctx.u, norm_pdf(y_arr - ctx.mu - c) / den, 0.0)
    return out if out.ndim else float(out)


def _goldilocks(ctx: TheoryContext, y: float | None) -> np.ndarray:
    if y is None:
        return ctx.g_bar
    g = ctx.a_lam_a + (y - ctx.mu) * ctx.a_mat
    if np.linalg.eigvalsh(g)[0] <= 0:
        raise DegenerateHessianError(
            "conditional location precision not positive definite at this height")
    return g


def approx_location_density(ctx: TheoryContext, h, y: float | None = None) -> float:
    """Density of the location offset, given the height y (or marginally).

    Second-order accurate: Gaussian with precision G(y) = A Lam^{-1} A +
    (y - mu) A (G(ubar) when y is None), times the first-order bracket
    (1 + T10 - T30/2), clamped at zero.
    """
    h = np.asarray(h, dtype=float)
    g = _goldilocks(ctx, y)
    d = ctx.dimension
    bracket = max(1.0 + _t10(ctx, h) - 0.5 * _t30(ctx, h), 0.0)
    norm = math.sqrt(np.linalg.det(g) / (2.0 * math.pi) ** d)
    return float(bracket * norm * math.exp(-0.5 * float(h @ g @ h)))


def carve_height_density(ctx: TheoryContext, y, gamma: float) -> np.ndarray | float:
    """Softly truncated height density after randomized selection (normalized)."""
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    y_arr = np.asarray(y, dtype=float)
    c = 0.5 * ctx.trace_corr
    b = ctx.u - gamma * c
    m = ctx.mu + c
    den = norm_sf((b - m) / math.sqrt(1.0 + gamma))
    out = norm_sf((b - y_arr) / math.sqrt(gamma)) * norm_pdf(y_arr - m) / den
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# null (signal-free) quantities
# ---------------------------------------------------------------------------

def null_palm_density(y, v: float, dimension: int) -> np.ndarray | float:
    """Height density of a null peak above the pre-threshold v."""
    if dimension < 1:
        raise ParameterError("dimension must be >= 1")
    if v <= 0:
        raise ParameterError("positive v required")
    y_arr = np.asarray(y, dtype=float)
    shift = dimension / v
    out = np.where(y_arr > v, norm_pdf(y_arr - shift) / norm_sf(v - shift), 0.0)
    return out if out.ndim else float(out)


def null_marginal_intensity(v: float, lambda_mat: np.ndarray, dimension: int) -> float:
    """Spatial intensity of null peaks above v (per unit volume)."""
    if dimension < 1:
        raise ParameterError("dimension must be >= 1")
    if v <= 0:
        raise ParameterError("positive v required")
    lam = np.asarray(lambda_mat, dtype=float)
    det = np.linalg.det(lam)
    return float(v ** dimension * math.sqrt(det) * math.exp(-dimension)
                 / (2.0 * math.pi) ** (dimension / 2.0)
                 * norm_sf(v - dimension / v))
