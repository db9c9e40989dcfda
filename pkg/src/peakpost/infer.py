"""Post-detection inference for the height and location of one peak.

Height: the survival pivot S_mu(Yhat) of the detected height under the
selection Y > u, with the curvature-and-noise mean correction
c = tr(H^{-1} Lambda) / 2 read off the observed peak Hessian. The pivot is
strictly increasing in mu and approximately Uniform(0, 1) at the true height,
so the equal-tailed interval inverts it at alpha/2 and 1 - alpha/2.

Location: the quadratic form (that - tstar)' H Lambda^{-1} H (that - tstar)
is approximately chi-square with d degrees of freedom, giving an ellipsoidal
confidence region around the detected location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateHessianError, NumericalError, ParameterError,
                     SelectionViolatedError)
from .special import chi2_cdf, chi2_quantile, norm_logsf

BRACKET_MAX_DOUBLINGS = 60
BISECT_TOL = 1e-9


def _mean_correction(neg_hessian: np.ndarray, lambda_mat: np.ndarray) -> float:
    h = np.asarray(neg_hessian, dtype=float)
    if np.linalg.eigvalsh(0.5 * (h + h.T))[0] <= 0:
        raise DegenerateHessianError(
            "peak Hessian must be negative definite for height inference")
    return 0.5 * float(np.trace(np.linalg.solve(h, np.asarray(lambda_mat, dtype=float))))


def tg_pivot(height: float, u: float, mu, neg_hessian: np.ndarray,
             lambda_mat: np.ndarray):
    """Survival pivot of the detected height, truncated to heights above u.

    Vectorized over mu; evaluated in log space, so it stays monotone and
    finite even for mu as extreme as -1e6. Values lie in (0, 1) and increase
    strictly with mu.
    """
    if height <= u:
        raise SelectionViolatedError(
            f"height {height} does not clear the selection threshold {u}")
    c = _mean_correction(neg_hessian, lambda_mat)
    mu_arr = np.asarray(mu, dtype=float)
    out = np.exp(norm_logsf(height - mu_arr - c) - norm_logsf(u - mu_arr - c))
    return out if out.ndim else float(out)


def _invert_increasing(fn, target: float, start: float):
    """Solve fn(x) = target for an increasing fn by doubling + bisection."""
    lo = hi = start
    step = 1.0
    for _ in range(BRACKET_MAX_DOUBLINGS):
        if fn(lo) <= target:
            break
        lo -= step
        step *= 2.0
    else:
        raise NumericalError("failed to bracket the pivot root from below")
    step = 1.0
    for _ in range(BRACKET_MAX_DOUBLINGS):
        if fn(hi) >= target:
            break
        hi += step
        step *= 2.0
    else:
        raise NumericalError("failed to bracket the pivot root from above")
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def height_interval(height: float, u: float, alpha: float,
                    neg_hessian: np.ndarray, lambda_mat: np.ndarray):
    """Equal-tailed interval for the height: {mu : alpha/2 <= pivot <= 1 - alpha/2}.

    The pivot is checked for strict monotonicity on a 100-point sweep across
    the solved range before the endpoints are returned.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")

    def fn(m):
        return tg_pivot(height, u, m, neg_hessian, lambda_mat)

    lo = _invert_increasing(fn, alpha / 2.0, height)
    hi = _invert_increasing(fn, 1.0 - alpha / 2.0, height)
    sweep = tg_pivot(height, u, np.linspace(lo - 1.0, hi + 1.0, 100),
                     neg_hessian, lambda_mat)
    if not np.all(np.diff(sweep) > 0):
        raise NumericalError("height pivot is not strictly increasing in mu")
    return lo, hi


def wald_statistic(location, center, neg_hessian: np.ndarray,
                   lambda_mat: np.ndarray) -> float:
    """Quadratic form h' H Lambda^{-1} H h for h = location - center."""
    h = np.asarray(location, dtype=float) - np.asarray(center, dtype=float)
    hess = np.asarray(neg_hessian, dtype=float)
    if np.linalg.eigvalsh(0.5 * (hess + hess.T))[0] <= 0:
        raise DegenerateHessianError(
            "peak Hessian must be negative definite for location inference")
    lam = np.asarray(lambda_mat, dtype=float)
    v = hess @ h
    return float(v @ np.linalg.solve(lam, v))


def wald_pivot(location, center, neg_hessian: np.ndarray,
               lambda_mat: np.ndarray) -> float:
    """Chi-square CDF of the Wald statistic; approximately Uniform(0, 1)."""
    d = np.asarray(center, dtype=float).shape[0]
    return chi2_cdf(wald_statistic(location, center, neg_hessian, lambda_mat), d)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """Region {t : (t - center)' precision (t - center) <= radius_sq}."""
    center: np.ndarray
    precision: np.ndarray
    radius_sq: float

    def __post_init__(self):
        p = np.asarray(self.precision, dtype=float)
        p = 0.5 * (p + p.T)
        if np.linalg.eigvalsh(p)[0] <= 0:
            raise DegenerateHessianError("ellipsoid precision must be positive definite")
        object.__setattr__(self, "precision", p)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def contains(self, point) -> bool:
        h = np.asarray(point, dtype=float) - self.center
        return bool(h @ self.precision @ h <= self.radius_sq)

    @property
    def width(self) -> float:
        """Largest semi-axis."""
        lam_min = np.linalg.eigvalsh(self.precision)[0]
        return math.sqrt(self.radius_sq / lam_min)


def location_ellipsoid(center, neg_hessian: np.ndarray, lambda_mat: np.ndarray,
                       alpha: float) -> Ellipsoid:
    """Wald confidence ellipsoid at level 1 - alpha around the detected location."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    center = np.asarray(center, dtype=float)
    hess = np.asarray(neg_hessian, dtype=float)
    hess = 0.5 * (hess + hess.T)
    if np.linalg.eigvalsh(hess)[0] <= 0:
        raise DegenerateHessianError(
            "peak Hessian must be negative definite for location inference")
    lam = np.asarray(lambda_mat, dtype=float)
    precision = hess @ np.linalg.solve(lam, hess)
    d = center.shape[0]
    return Ellipsoid(center=center, precision=precision,
                     radius_sq=chi2_quantile(d, 1.0 - alpha))
