"""Error-rate and coverage estimators for peak-detection experiments.

All rate criteria are ratios of expectations, estimated by pooling counts
over replicates (ratio of sums); the standard error comes from a
leave-one-replicate-out jackknife. Coverage conditional on a selection event
is a plain binomial proportion over the conditioned replicates.

Discovery labels:
* "epsilon-consistent" -- within eps_n of some true peak;
* "null-region"        -- the signal vanishes identically near the discovery;
* "high-gradient"      -- everything else (slopes and shoulders).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import SignalSpec


@dataclass(frozen=True)
class PeakLabel:
    label: str
    nearest_true: int
    distance: float


def label_peaks(peaks, true_peaks, signal: SignalSpec, eps_n: float) -> list:
    """Label each detected peak relative to the true peak set."""
    locs = [tp.location for tp in true_peaks]
    out = []
    for p in peaks:
        if locs:
            dists = [float(np.linalg.norm(p.location - loc)) for loc in locs]
            nearest = int(np.argmin(dists))
            dist = dists[nearest]
        else:
            nearest, dist = -1, math.inf
        if dist <= eps_n:
            label = "epsilon-consistent"
        elif signal.is_null_on_ball(p.location, eps_n):
            label = "null-region"
        else:
            label = "high-gradient"
        out.append(PeakLabel(label=label, nearest_true=nearest, distance=dist))
    return out


@dataclass(frozen=True)
class RateEstimate:
    value: float
    se: float
    numerator: float
    denominator: float
    replicates: int


def ratio_of_sums(numerators, denominators) -> RateEstimate:
    """Pooled ratio estimate with a leave-one-replicate-out jackknife SE.

    A zero pooled denominator yields NaN value and SE (the counts are still
    reported so the caller can see what happened).
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    if num.shape != den.shape or num.ndim != 1:
        raise ParameterError("numerators and denominators must be equal-length vectors")
    r = num.shape[0]
    tot_n, tot_d = float(num.sum()), float(den.sum())
    if r == 0 or tot_d <= 0:
        return RateEstimate(value=math.nan, se=math.nan, numerator=tot_n,
                            denominator=tot_d, replicates=r)
    value = tot_n / tot_d
    loo_d = tot_d - den
    with np.errstate(divide="ignore", invalid="ignore"):
        loo = np.where(loo_d > 0, (tot_n - num) / loo_d, value)
    se = math.sqrt((r - 1) / r * float(np.sum((loo - loo.mean()) ** 2)))
    return RateEstimate(value=value, se=se, numerator=tot_n, denominator=tot_d,
                        replicates=r)


def estimate_null_pcer(null_discoveries, prethresholded) -> RateEstimate:
    """Expected null discoveries over expected prethresholded peaks."""
    return ratio_of_sums(null_discoveries, prethresholded)


def estimate_eps_pcer(inconsistent_discoveries, prethresholded) -> RateEstimate:
    """Expected discoveries farther than eps_n from every true peak, over
    expected prethresholded peaks."""
    return ratio_of_sums(inconsistent_discoveries, prethresholded)


def estimate_pcmr(miscovered_discoveries, prethresholded) -> RateEstimate:
    """Expected discoveries whose region misses the nearest true peak's
    parameter, over expected prethresholded peaks."""
    return ratio_of_sums(miscovered_discoveries, prethresholded)


@dataclass(frozen=True)
class CoverageEstimate:
    value: float
    se: float
    n: int


def conditional_coverage(covered) -> CoverageEstimate:
    """Binomial proportion of covering regions among conditioned replicates."""
    arr = np.asarray(covered, dtype=bool)
    n = arr.shape[0]
    if n == 0:
        return CoverageEstimate(value=math.nan, se=math.nan, n=0)
    p = float(arr.mean())
    return CoverageEstimate(value=p, se=math.sqrt(max(p * (1.0 - p), 0.0) / n), n=n)
