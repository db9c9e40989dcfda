"""Covariance kernels with derivative tensors, and the deterministic signal.

The signal is a superposition of radially symmetric bumps. Each bump is a
Gaussian profile amplitude * exp(-||t - c||^2 / (2 w^2)), optionally forced to
compact support by a C^2 smoothstep taper that leaves the profile untouched
within radius 2.5 w and takes it to exactly zero at 4 w. With the taper and
the enforced 6 w pairwise separation, every bump center is exactly a strict
local maximum of the full signal (no inter-bump contamination at all).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, CurvatureTooLowError, DomainError,
                     ModelError, ParameterError)

_TAPER_INNER = 2.5   # multiples of bump width where the taper starts
_TAPER_OUTER = 4.0   # multiples of bump width where support ends

MIN_EPS_CONSTANT = 4.0 + 1e-6


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Stationary isotropic correlation kernel, K(t, t) = 1."""
    family: str = "squared-exponential"
    length_scale: float = 0.15
    dimension: int = 2

    def __post_init__(self):
        if self.family != "squared-exponential":
            raise ConfigurationError(f"unknown kernel family: {self.family!r}")
        if not self.length_scale > 0:
            raise ConfigurationError("length_scale must be positive")
        if int(self.dimension) < 1:
            raise ConfigurationError("dimension must be a positive integer")


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    """Derivative tensors of the kernel at coincident points.

    lambda_mat is Cov[grad eps_t] (d x d, SPD); k21 the third-order tensor
    K_21(t, t); gamma = K_21 Lambda^{-1}. For stationary isotropic kernels the
    odd tensors vanish identically. sigma1_sq = inf_t lambda_min(Lambda_t).
    """
    lambda_mat: np.ndarray
    k21: np.ndarray
    gamma: np.ndarray
    sigma1_sq: float

    def __post_init__(self):
        lam = np.asarray(self.lambda_mat, dtype=float)
        if not np.allclose(lam, lam.T):
            raise ConfigurationError("lambda_mat must be symmetric")
        if np.linalg.eigvalsh(lam)[0] <= 0:
            raise ConfigurationError("lambda_mat must be positive definite")


def kernel_eval(spec: KernelSpec, s, t) -> float:
    """Correlation K(s, t); 1 iff s == t."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
        raise ConfigurationError("kernel arguments must be finite")
    r2 = float(np.sum((s - t) ** 2))
    return float(np.exp(-r2 / (2.0 * spec.length_scale ** 2)))


def kernel_matrix(spec: KernelSpec, points: np.ndarray) -> np.ndarray:
    """Dense correlation matrix over a point set (n, d)."""
    pts = np.asarray(points, dtype=float)
    sq = np.sum(pts ** 2, axis=1)
    r2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    np.maximum(r2, 0.0, out=r2)
    return np.exp(-r2 / (2.0 * spec.length_scale ** 2))


def derivative_bundle(spec: KernelSpec) -> DerivativeBundle:
    """Analytic derivative tensors for the squared-exponential family."""
    d = spec.dimension
    lam = np.eye(d) / spec.length_scale ** 2
    zeros3 = np.zeros((d, d, d))
    return DerivativeBundle(lambda_mat=lam, k21=zeros3, gamma=zeros3.copy(),
                            sigma1_sq=1.0 / spec.length_scale ** 2)


# ---------------------------------------------------------------------------
# signal
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Bump:
    center: np.ndarray
    amplitude: float
    width: float


@dataclass(frozen=True, eq=False)
class SignalSpec:
    """Bump-superposition mean over an axis-aligned box domain.

    domain is a (d, 2) array of [low, high] per axis. With tapered=True each
    bump is compactly supported (zero beyond 4 * width).
    """
    bumps: tuple
    domain: np.ndarray
    tapered: bool = False

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float)
        if dom.ndim != 2 or dom.shape[1] != 2 or np.any(dom[:, 0] >= dom[:, 1]):
            raise ConfigurationError("domain must be a (d, 2) box with low < high")
        object.__setattr__(self, "domain", dom)
        bumps = tuple(
            Bump(center=np.asarray(b.center, dtype=float),
                 amplitude=float(b.amplitude), width=float(b.width))
            if not isinstance(b, Bump) else b
            for b in self.bumps
        )
        object.__setattr__(self, "bumps", bumps)
        widths = [b.width for b in bumps]
        if any(w <= 0 for w in widths):
            raise ConfigurationError("bump widths must be positive")
        for b in bumps:
            if b.center.shape != (dom.shape[0],):
                raise ConfigurationError("bump center dimension mismatch")
            margin = 3.0 * b.width
            if np.any(b.center - dom[:, 0] < margin) or np.any(dom[:, 1] - b.center < margin):
                raise ConfigurationError(
                    "bump centers need margin >= 3 * width from the boundary")
        if bumps:
            sep = 6.0 * max(widths)
            for i in range(len(bumps)):
                for j in range(i + 1, len(bumps)):
                    dist = np.linalg.norm(bumps[i].center - bumps[j].center)
                    if dist < sep - 1e-12:
                        raise ConfigurationError(
                            "bump centers must be separated by >= 6 * max width")

    @property
    def dimension(self) -> int:
        return self.domain.shape[0]

    def contains(self, t: np.ndarray) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all(t >= self.domain[:, 0]) and np.all(t <= self.domain[:, 1]))

    def is_null_on_ball(self, t: np.ndarray, radius: float) -> bool:
        """True iff the signal vanishes identically on B(t, radius).

        Exact support logic: an untapered Gaussian bump never vanishes, a
        tapered one is zero beyond 4 * width of its center.
        """
        t = np.asarray(t, dtype=float)
        for b in self.bumps:
            if b.amplitude == 0.0:
                continue
            if not self.tapered:
                return False
            if np.linalg.norm(t - b.center) < _TAPER_OUTER * b.width + radius:
                return False
        return True


def _smoothstep(x):
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def _smoothstep_d1(x):
    return 30.0 * x * x * (x - 1.0) ** 2


def _smoothstep_d2(x):
    return 60.0 * x * (2.0 * x - 1.0) * (x - 1.0)


def _taper(r, width):
    """C^2 cutoff chi(r) with chi = 1 below 2.5 w and 0 above 4 w."""
    r1, r2 = _TAPER_INNER * width, _TAPER_OUTER * width
    x = np.clip((r - r1) / (r2 - r1), 0.0, 1.0)
    return 1.0 - _smoothstep(x)


def _taper_d1(r, width):
    r1, r2 = _TAPER_INNER * width, _TAPER_OUTER * width
    inside = (r > r1) & (r < r2)
    x = np.clip((r - r1) / (r2 - r1), 0.0, 1.0)
    return np.where(inside, -_smoothstep_d1(x) / (r2 - r1), 0.0)


def _taper_d2(r, width):
    r1, r2 = _TAPER_INNER * width, _TAPER_OUTER * width
    inside = (r > r1) & (r < r2)
    x = np.clip((r - r1) / (r2 - r1), 0.0, 1.0)
    return np.where(inside, -_smoothstep_d2(x) / (r2 - r1) ** 2, 0.0)


def signal_values(spec: SignalSpec, points: np.ndarray) -> np.ndarray:
    """Vectorized signal over an (n, d) point array (no domain check)."""
    pts = np.asarray(points, dtype=float)
    out = np.zeros(pts.shape[0])
    for b in spec.bumps:
        r2 = np.sum((pts - b.center) ** 2, axis=1)
        g = b.amplitude * np.exp(-r2 / (2.0 * b.width ** 2))
        if spec.tapered:
            g = g * _taper(np.sqrt(r2), b.width)
        out += g
    return out


def signal_eval(spec: SignalSpec, t) -> float:
    t = np.asarray(t, dtype=float)
    if not spec.contains(t):
        raise DomainError(f"point {t} outside signal domain")
    return float(signal_values(spec, t[None, :])[0])


def signal_grad(spec: SignalSpec, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not spec.contains(t):
        raise DomainError(f"point {t} outside signal domain")
    grad = np.zeros_like(t)
    for b in spec.bumps:
        x = t - b.center
        r = float(np.linalg.norm(x))
        w2 = b.width ** 2
        g = b.amplitude * np.exp(-r * r / (2.0 * w2))
        if not spec.tapered or r <= _TAPER_INNER * b.width:
            grad += -(x / w2) * g
        elif r < _TAPER_OUTER * b.width:
            chi = float(_taper(r, b.width))
            chi1 = float(_taper_d1(r, b.width))
            fprime = -(r / w2) * g * chi + g * chi1
            grad += fprime * (x / r)
    return grad


def signal_hess(spec: SignalSpec, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if not spec.contains(t):
        raise DomainError(f"point {t} outside signal domain")
    d = t.shape[0]
    hess = np.zeros((d, d))
    eye = np.eye(d)
    for b in spec.bumps:
        x = t - b.center
        r = float(np.linalg.norm(x))
        w2 = b.width ** 2
        g = b.amplitude * np.exp(-r * r / (2.0 * w2))
        if not spec.tapered or r <= _TAPER_INNER * b.width:
            hess += g * (np.outer(x, x) / w2 ** 2 - eye / w2)
        elif r < _TAPER_OUTER * b.width:
            chi = float(_taper(r, b.width))
            chi1 = float(_taper_d1(r, b.width))
            chi2 = float(_taper_d2(r, b.width))
            g1 = -(r / w2) * g
            g2 = (r * r / w2 ** 2 - 1.0 / w2) * g
            fprime = g1 * chi + g * chi1
            fsecond = g2 * chi + 2.0 * g1 * chi1 + g * chi2
            xhat = x / r
            proj = np.outer(xhat, xhat)
            hess += fsecond * proj + (fprime / r) * (eye - proj)
    return hess


def signal_third(spec: SignalSpec, t) -> np.ndarray:
    """Third-derivative tensor (d, d, d) of the signal.

    Analytic for the pure-Gaussian region of each bump (which is all that the
    density expansions evaluate: bump centers and their neighborhoods); in the
    taper band it falls back to central differences of the analytic Hessian.
    """
    t = np.asarray(t, dtype=float)
    if not spec.contains(t):
        raise DomainError(f"point {t} outside signal domain")
    d = t.shape[0]
    eye = np.eye(d)
    out = np.zeros((d, d, d))
    band = False
    for b in spec.bumps:
        x = t - b.center
        r = float(np.linalg.norm(x))
        w2 = b.width ** 2
        if spec.tapered and r >= _TAPER_OUTER * b.width:
            continue
        if not spec.tapered or r <= _TAPER_INNER * b.width:
            g = b.amplitude * np.exp(-r * r / (2.0 * w2))
            sym = (np.einsum("ij,k->ijk", eye, x)
                   + np.einsum("ik,j->ijk", eye, x)
                   + np.einsum("jk,i->ijk", eye, x))
            out += g * (sym / w2 ** 2 - np.einsum("i,j,k->ijk", x, x, x) / w2 ** 3)
        else:
            band = True
    if band:
        step = 1e-5
        for k in range(d):
            ek = np.zeros(d)
            ek[k] = step
            out[:, :, k] = (signal_hess(spec, t + ek) - signal_hess(spec, t - ek)) / (2.0 * step)
    return out


# ---------------------------------------------------------------------------
# true peaks and curvature scales
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruePeak:
    location: np.ndarray
    height: float
    neg_hessian: np.ndarray
    delta: float

    def __post_init__(self):
        nh = np.asarray(self.neg_hessian, dtype=float)
        if not np.allclose(nh, nh.T):
            raise ModelError("peak neg_hessian must be symmetric")
        if np.linalg.eigvalsh(nh)[0] <= 0:
            raise ModelError("peak neg_hessian must be positive definite")


def true_peaks(spec: SignalSpec) -> list:
    """Ground-truth peaks, one per bump, Newton-polished on the analytic gradient."""
    peaks = []
    for b in spec.bumps:
        x = b.center.copy()
        for _ in range(30):
            g = signal_grad(spec, x)
            if np.linalg.norm(g) <= 1e-13:
                break
            h = signal_hess(spec, x)
            x = x - np.linalg.solve(h, g)
        hess = signal_hess(spec, x)
        neg = -hess
        evals = np.linalg.eigvalsh(neg)
        if evals[0] <= 0:
            raise ModelError("reported peak does not have a negative-definite Hessian")
        peaks.append(TruePeak(location=x, height=signal_eval(spec, x),
                              neg_hessian=neg, delta=1.0 / float(evals[0])))
    return peaks


@dataclass(frozen=True)
class CurvatureScales:
    delta_n: float
    lambda_n: float
    eps_n: float
    Delta_n: float
    eps_constant: float


def curvature_scales(peaks, bundle: DerivativeBundle,
                     eps_constant: float = 6.0) -> CurvatureScales:
    """Localization radius eps_n and height window Delta_n from peak curvature."""
    if not peaks:
        raise ParameterError("curvature scales need a nonempty peak list")
    if eps_constant < MIN_EPS_CONSTANT:
        raise ConfigurationError(
            f"eps_constant must be > 4 (got {eps_constant})")
    delta_n = max(p.delta for p in peaks)
    lambda_n = 1.0 / delta_n
    if lambda_n <= 1.0:
        raise CurvatureTooLowError(
            "lambda_n <= 1: curvature too low for the local expansion scales")
    log_l = np.log(lambda_n)
    eps_n = delta_n * float(np.sqrt(eps_constant * bundle.sigma1_sq * log_l))
    Delta_n = float(np.sqrt(eps_constant * log_l))
    return CurvatureScales(delta_n=delta_n, lambda_n=lambda_n, eps_n=eps_n,
                           Delta_n=Delta_n, eps_constant=eps_constant)
