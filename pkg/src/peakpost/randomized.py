"""Inference after randomized (noise-injected) peak detection.

Detection runs on the selection field Y + sqrt(gamma) * omega. Two inference
routes are supported:

* carve -- reuse the full field Y. The height pivot is the CDF of a softly
  truncated Gaussian (the hard indicator 1{y > u} of the non-randomized
  analysis becomes a Gaussian survival factor with bandwidth sqrt(gamma)),
  computed by adaptive quadrature. The location pivot is a Wald form mixing
  the full-data peak Hessian with the selection-free curvature estimate taken
  from the inference field.

* split -- use only the inference field Y - omega / sqrt(gamma), which is
  independent of selection. Pivots are the unconditional (threshold-free)
  peak-height and location pivots of that field, rescaled by its noise level
  tau = sqrt(1 + 1/gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateHessianError, MatchingError, NumericalError,
                     ParameterError)
from .infer import Ellipsoid, _invert_increasing, _mean_correction
from .special import (adaptive_simpson, chi2_cdf, chi2_quantile, norm_pdf,
                      norm_sf, norm_upper_quantile)

SOFT_CDF_TOL = 1e-10
SOFT_CDF_HALF_WIDTH = 10.0


def match_nearest_peak(peaks, target, bound: float):
    """Nearest peak to the target location, required to lie within bound.

    Distance ties are broken toward the smaller flat grid index. Raises
    MatchingError when no peak comes close enough.
    """
    target = np.asarray(target, dtype=float)
    if not peaks:
        raise MatchingError("no candidate peaks to match against")
    best = None
    best_dist = np.inf
    for p in peaks:
        dist = float(np.linalg.norm(p.location - target))
        if dist < best_dist - 1e-12 or (abs(dist - best_dist) <= 1e-12
                                        and best is not None
                                        and p.grid_index < best.grid_index):
            best, best_dist = p, dist
    if best_dist > bound:
        raise MatchingError(
            f"nearest peak is {best_dist:.4g} away, beyond the bound {bound:.4g}")
    return best


# ---------------------------------------------------------------------------
# carve
# ---------------------------------------------------------------------------

def soft_tg_cdf(y, u: float, mu: float, gamma: float,
                neg_hessian: np.ndarray, lambda_mat: np.ndarray) -> float:
    """CDF at y of the softly truncated Gaussian height law.

    The density is proportional to
    Psi((u - z - (gamma/2) c2) / sqrt(gamma)) * phi(z - mu - c2/2) with
    c2 = tr(H^{-1} Lambda); both the partial and full normalizing integrals
    run over mu + c2/2 +- 10 by adaptive Simpson quadrature (absolute
    tolerance 1e-10). Decreasing in mu; as gamma -> 0 it approaches the hard
    truncated-Gaussian CDF, and as u -> -infinity the plain normal CDF.
    """
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    c2 = 2.0 * _mean_correction(neg_hessian, lambda_mat)
    m = mu + 0.5 * c2
    b = u - 0.5 * gamma * c2
    root = np.sqrt(gamma)

    def integrand(w):
        return norm_sf((b - m - w) / root) * norm_pdf(w)

    y_shift = float(y) - m
    if y_shift <= -SOFT_CDF_HALF_WIDTH:
        return 0.0
    den = adaptive_simpson(integrand, -SOFT_CDF_HALF_WIDTH, SOFT_CDF_HALF_WIDTH,
                           tol=SOFT_CDF_TOL)
    if den <= 0.0:
        raise NumericalError("soft truncated-Gaussian normalizer underflowed")
    if y_shift >= SOFT_CDF_HALF_WIDTH:
        return 1.0
    num = adaptive_simpson(integrand, -SOFT_CDF_HALF_WIDTH, y_shift,
                           tol=SOFT_CDF_TOL)
    return float(min(max(num / den, 0.0), 1.0))


def carve_height_pivot(height: float, u: float, mu: float, gamma: float,
                       neg_hessian: np.ndarray, lambda_mat: np.ndarray) -> float:
    """Soft-TG CDF of the full-data peak height; ~ Uniform(0,1) at the truth."""
    return soft_tg_cdf(height, u, mu, gamma, neg_hessian, lambda_mat)


def carve_height_interval(height: float, u: float, alpha: float, gamma: float,
                          neg_hessian: np.ndarray, lambda_mat: np.ndarray):
    """Equal-tailed interval {mu : alpha/2 <= soft-TG CDF <= 1 - alpha/2}.

    The CDF pivot is decreasing in mu, so the endpoints come from inverting
    1 - pivot; a 100-point sweep across the solved range checks strict
    monotonicity before the interval is returned.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")

    def fn(m):
        return 1.0 - soft_tg_cdf(height, u, m, gamma, neg_hessian, lambda_mat)

    start = height - 2.0 * _mean_correction(neg_hessian, lambda_mat)
    lo = _invert_increasing(fn, alpha / 2.0, start)
    hi = _invert_increasing(fn, 1.0 - alpha / 2.0, start)
    lo, hi = min(lo, hi), max(lo, hi)
    sweep = np.array([fn(m) for m in np.linspace(lo, hi, 100)])
    diffs = np.diff(sweep)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise NumericalError("soft-TG pivot is not strictly monotone in mu")
    return lo, hi


def carve_precision(neg_hessian: np.ndarray, neg_hessian_inf: np.ndarray,
                    lambda_mat: np.ndarray) -> np.ndarray:
    """Symmetrized H Lambda^{-1} H_inf; must come out positive definite."""
    h = np.asarray(neg_hessian, dtype=float)
    hi = np.asarray(neg_hessian_inf, dtype=float)
    lam = np.asarray(lambda_mat, dtype=float)
    a = h @ np.linalg.solve(lam, hi)
    m = 0.5 * (a + a.T)
    if np.linalg.eigvalsh(m)[0] <= 0:
        raise DegenerateHessianError(
            "carve location precision (sym H Lambda^{-1} H_inf) is not positive definite")
    return m


def carve_wald_pivot(location, center, neg_hessian: np.ndarray,
                     neg_hessian_inf: np.ndarray, lambda_mat: np.ndarray) -> float:
    """Chi-square CDF of (t - c)' H Lambda^{-1} H_inf (t - c); ~ Uniform(0,1)."""
    m = carve_precision(neg_hessian, neg_hessian_inf, lambda_mat)
    h = np.asarray(location, dtype=float) - np.asarray(center, dtype=float)
    return chi2_cdf(float(h @ m @ h), h.shape[0])


def carve_location_ellipsoid(center, neg_hessian: np.ndarray,
                             neg_hessian_inf: np.ndarray,
                             lambda_mat: np.ndarray, alpha: float) -> Ellipsoid:
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    center = np.asarray(center, dtype=float)
    m = carve_precision(neg_hessian, neg_hessian_inf, lambda_mat)
    return Ellipsoid(center=center, precision=m,
                     radius_sq=chi2_quantile(center.shape[0], 1.0 - alpha))


@dataclass(frozen=True, eq=False)
class CarveContext:
    """Everything carve inference needs about one randomized discovery.

    sel_peak is the discovery on the selection field; full_peak the nearest
    peak of the full field (matched within (1 + sqrt(1 + gamma)) * eps_n);
    neg_hessian_inf the inference-field curvature interpolated at the
    full-data peak location. u is the threshold applied to the raw selection
    field.
    """
    gamma: float
    u: float
    sel_peak: object
    full_peak: object
    neg_hessian_inf: np.ndarray
    lambda_mat: np.ndarray

    def height_interval(self, alpha: float):
        return carve_height_interval(self.full_peak.height, self.u, alpha,
                                     self.gamma, self.full_peak.neg_hessian,
                                     self.lambda_mat)

    def height_pivot(self, mu: float) -> float:
        return carve_height_pivot(self.full_peak.height, self.u, mu,
                                  self.gamma, self.full_peak.neg_hessian,
                                  self.lambda_mat)

    def location_ellipsoid(self, alpha: float) -> Ellipsoid:
        return carve_location_ellipsoid(self.full_peak.location,
                                        self.full_peak.neg_hessian,
                                        self.neg_hessian_inf,
                                        self.lambda_mat, alpha)

    def location_pivot(self, point) -> float:
        return carve_wald_pivot(point, self.full_peak.location,
                                self.full_peak.neg_hessian,
                                self.neg_hessian_inf, self.lambda_mat)


def carve_match_bound(eps_n: float, gamma: float) -> float:
    """Separation allowed between a selection peak and its full-data partner."""
    return (1.0 + np.sqrt(1.0 + gamma)) * eps_n


# ---------------------------------------------------------------------------
# split
# ---------------------------------------------------------------------------

def split_tau(gamma: float) -> float:
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    return float(np.sqrt(1.0 + 1.0 / gamma))


def split_height_pivot(height_inf: float, mu, gamma: float,
                       neg_hessian_inf: np.ndarray, lambda_mat: np.ndarray):
    """Survival pivot of the inference-field peak height (no truncation).

    Psi((Ytilde - mu - (tau^2 / 2) tr(Htilde^{-1} Lambda)) / tau) with
    tau = sqrt(1 + 1/gamma); increasing in mu, ~ Uniform(0,1) at the truth.
    """
    tau = split_tau(gamma)
    c = tau ** 2 * _mean_correction(neg_hessian_inf, lambda_mat)
    mu_arr = np.asarray(mu, dtype=float)
    out = norm_sf((height_inf - mu_arr - c) / tau)
    return out if out.ndim else float(out)


def split_height_interval(height_inf: float, alpha: float, gamma: float,
                          neg_hessian_inf: np.ndarray, lambda_mat: np.ndarray):
    """Closed-form equal-tailed interval: Ytilde - c -+ tau * z_{1 - alpha/2}."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    tau = split_tau(gamma)
    c = tau ** 2 * _mean_correction(neg_hessian_inf, lambda_mat)
    z = norm_upper_quantile(alpha / 2.0)
    return height_inf - c - tau * z, height_inf - c + tau * z


def split_location_ellipsoid(center, neg_hessian_inf: np.ndarray,
                             lambda_mat: np.ndarray, alpha: float,
                             gamma: float) -> Ellipsoid:
    """Wald ellipsoid from the inference field alone.

    The precision is Htilde (tau^2 Lambda)^{-1} Htilde: the inference field's
    gradient noise is tau^2 Lambda, so its own Wald form carries the 1/tau^2.
    In the gamma -> infinity limit (omega contributes nothing) this reduces to
    the non-randomized ellipsoid.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    tau = split_tau(gamma)
    center = np.asarray(center, dtype=float)
    hess = np.asarray(neg_hessian_inf, dtype=float)
    hess = 0.5 * (hess + hess.T)
    if np.linalg.eigvalsh(hess)[0] <= 0:
        raise DegenerateHessianError(
            "inference-field Hessian must be negative definite at the matched peak")
    lam = tau ** 2 * np.asarray(lambda_mat, dtype=float)
    precision = hess @ np.linalg.solve(lam, hess)
    return Ellipsoid(center=center, precision=precision,
                     radius_sq=chi2_quantile(center.shape[0], 1.0 - alpha))


def split_match_bound(eps_n: float, gamma: float) -> float:
    """Separation allowed between a selection peak and its inference partner."""
    return (np.sqrt(1.0 + gamma) + split_tau(gamma)) * eps_n
