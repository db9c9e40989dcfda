"""Height test for peaks of a smooth unit-variance Gaussian field.

Under the null (no signal near the peak), the height of a local maximum above
a pre-threshold v is approximately a Gaussian with unit variance and mean
shift d/v, truncated to (v, inf), where d is the domain dimension. The test
rejects when the survival of that law at the observed height drops below
alpha; equivalently when the height clears the closed-form threshold
u(alpha, v) = d/v + Qnorm(alpha * Psi(v - d/v)).

On a randomized selection field Y + sqrt(gamma) * omega the same test applies
to the field standardized by its marginal sd sqrt(1 + gamma); noise_scale
carries that factor so heights stay in raw units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .special import norm_logsf, norm_sf, norm_upper_quantile


def tg_survival(height: float, v: float, dimension: int) -> float:
    """Null survival P(peak height > height | height > v), dimension-shifted.

    Evaluated in log space so deep tails keep full relative accuracy.
    dimension = 0 is the plain truncated normal (no shift).
    """
    if not np.isfinite(height):
        raise ParameterError("peak height must be finite")
    if not np.isfinite(v):
        raise ParameterError("pre-threshold v must be finite")
    if dimension < 0:
        raise ParameterError("dimension must be >= 0")
    if height < v:
        raise ParameterError(f"height {height} below the pre-threshold {v}")
    if dimension and v <= 0:
        raise ParameterError("positive v required for the dimension shift d/v")
    shift = dimension / v if dimension else 0.0
    return float(math.exp(norm_logsf(height - shift) - norm_logsf(v - shift)))


def tg_threshold(alpha: float, v: float, dimension: int) -> float:
    """Height threshold whose null survival is exactly alpha (closed form)."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    if not np.isfinite(v):
        raise ParameterError("pre-threshold v must be finite")
    if dimension < 0:
        raise ParameterError("dimension must be >= 0")
    if dimension and v <= 0:
        raise ParameterError("positive v required for the dimension shift d/v")
    shift = dimension / v if dimension else 0.0
    return shift + norm_upper_quantile(alpha * norm_sf(v - shift))


def prethreshold(peaks, threshold: float) -> list:
    """Peaks whose height strictly clears the threshold (order preserved)."""
    return [p for p in peaks if p.height > threshold]


@dataclass(frozen=True, eq=False)
class Detection:
    peak: object
    pvalue: float
    selected: bool
    threshold: float


def tg_test(peaks, v: float, alpha: float, dimension: int,
            noise_scale: float = 1.0) -> list:
    """Test every prethresholded peak; heights are divided by noise_scale.

    Returns one Detection per peak with height > noise_scale * v. The
    selected flag (pvalue <= alpha) coincides with the threshold comparison
    height >= noise_scale * u(alpha, v) up to floating-point roundoff.
    """
    if not noise_scale > 0:
        raise ParameterError("noise_scale must be positive")
    u = noise_scale * tg_threshold(alpha, v, dimension)
    out = []
    for p in prethreshold(peaks, noise_scale * v):
        pv = tg_survival(p.height / noise_scale, v, dimension)
        out.append(Detection(peak=p, pvalue=pv, selected=pv <= alpha, threshold=u))
    return out
