"""Grid discretization, covariance factorization, and field sampling.

Sampling is counter-based: every replicate draws its noise from a Philox
generator keyed by (base_seed, replicate, stream), so any single replicate can
be regenerated in isolation, in any order, bit-identically. Stream 0 carries
the field noise, stream 1 the randomization noise omega.

The covariance factor is computed once per (kernel, grid) and reused across
all replicates; a field draw is then mu + L z with z iid standard normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, GridTooLargeError,
                     IllConditionedKernelError, ParameterError)
from .model import KernelSpec, kernel_matrix

MAX_GRID_POINTS = 4096

NOISE_STREAM = 0
OMEGA_STREAM = 1


@dataclass(frozen=True, eq=False)
class Grid:
    """Regular rectangular grid over an axis-aligned box.

    shape[k] points along axis k, inclusive of both endpoints. points is the
    (n, d) array of grid locations in row-major (last axis fastest) order.
    """
    shape: tuple
    domain: np.ndarray

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float)
        shape = tuple(int(m) for m in self.shape)
        if dom.ndim != 2 or dom.shape[1] != 2 or np.any(dom[:, 0] >= dom[:, 1]):
            raise ConfigurationError("domain must be a (d, 2) box with low < high")
        if len(shape) != dom.shape[0]:
            raise ConfigurationError("grid shape / domain dimension mismatch")
        if any(m < 2 for m in shape):
            raise ConfigurationError("need at least 2 points per axis")
        n = int(np.prod(shape))
        if n > MAX_GRID_POINTS:
            raise GridTooLargeError(
                f"{n} grid points exceeds the dense-covariance cap of {MAX_GRID_POINTS}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "domain", dom)
        axes = [np.linspace(dom[k, 0], dom[k, 1], shape[k]) for k in range(len(shape))]
        object.__setattr__(self, "axes", axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        object.__setattr__(self, "points", np.stack([m.ravel() for m in mesh], axis=1))
        object.__setattr__(
            self, "spacings",
            np.array([(dom[k, 1] - dom[k, 0]) / (shape[k] - 1) for k in range(len(shape))]))

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def reshape(self, flat_values: np.ndarray) -> np.ndarray:
        """View a flat field vector as an array with the grid's shape."""
        return np.asarray(flat_values).reshape(self.shape)

    def flat_index(self, multi_index) -> int:
        return int(np.ravel_multi_index(tuple(int(i) for i in multi_index), self.shape))

    def location(self, multi_index) -> np.ndarray:
        return self.points[self.flat_index(multi_index)]


def default_grid(n: int = 48, dimension: int = 2, half_width: float = 1.0) -> Grid:
    dom = np.array([[-half_width, half_width]] * dimension)
    return Grid(shape=(n,) * dimension, domain=dom)


@dataclass(frozen=True, eq=False)
class CovarianceFactor:
    """Lower-triangular factor L with L L^T = K + jitter * I."""
    factor: np.ndarray
    jitter: float
    grid: Grid
    kernel: KernelSpec


def covariance_factor(kernel: KernelSpec, grid: Grid,
                      enforce_resolution: bool = False) -> CovarianceFactor:
    """Cholesky factor of the kernel matrix over the grid.

    Retries with a jitter ladder 1e-10, 1e-9, ..., 1e-6 on the diagonal if the
    plain factorization fails; beyond that the kernel matrix is declared
    ill-conditioned. With enforce_resolution the grid spacing must resolve the
    correlation length (spacing <= length_scale / 6 on every axis).
    """
    if kernel.dimension != grid.dimension:
        raise ConfigurationError("kernel / grid dimension mismatch")
    if enforce_resolution and np.any(grid.spacings > kernel.length_scale / 6.0):
        raise ConfigurationError(
            "grid spacing too coarse for the kernel length scale (need <= l/6)")
    k = kernel_matrix(kernel, grid.points)
    jitters = [0.0] + [10.0 ** e for e in range(-10, -5)]
    for jit in jitters:
        try:
            chol = np.linalg.cholesky(k + jit * np.eye(k.shape[0]) if jit else k)
            return CovarianceFactor(factor=chol, jitter=jit, grid=grid, kernel=kernel)
        except np.linalg.LinAlgError:
            continue
    raise IllConditionedKernelError(
        "kernel matrix not factorizable even with jitter up to 1e-6")


def _generator(base_seed: int, replicate: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(base_seed, spawn_key=(replicate, stream))
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, dtype=np.uint64)))


def noise_draws(base_seed: int, replicate: int, stream: int, n: int) -> np.ndarray:
    """The replicate's standard-normal vector; independent across streams."""
    return _generator(base_seed, replicate, stream).standard_normal(n)


@dataclass(frozen=True, eq=False)
class FieldSample:
    grid: Grid
    mu: np.ndarray
    values: np.ndarray
    base_seed: int
    replicate: int


def sample_field(factor: CovarianceFactor, mu: np.ndarray, base_seed: int,
                 replicate: int, z: np.ndarray | None = None) -> FieldSample:
    """One field draw Y = mu + L z on the factor's grid.

    z may be supplied explicitly (e.g. zeros for a noise-free check); by
    default it comes from the (base_seed, replicate, NOISE_STREAM) generator.
    """
    mu = np.asarray(mu, dtype=float)
    n = factor.grid.size
    if mu.shape != (n,):
        raise ParameterError("mu must be a flat vector over the grid")
    if z is None:
        z = noise_draws(base_seed, replicate, NOISE_STREAM, n)
    values = mu + factor.factor @ np.asarray(z, dtype=float)
    return FieldSample(grid=factor.grid, mu=mu, values=values,
                       base_seed=base_seed, replicate=replicate)


@dataclass(frozen=True, eq=False)
class RandomizationSplit:
    """Selection / inference pair Y +- scaled omega with omega ~ N(0, K).

    y_sel = y + sqrt(gamma) omega and y_inf = y - omega / sqrt(gamma) are
    independent Gaussian fields; y is recovered exactly as
    (y_sel + gamma * y_inf) / (1 + gamma).
    """
    y_sel: np.ndarray
    y_inf: np.ndarray
    gamma: float

    def reconstruct(self) -> np.ndarray:
        return (self.y_sel + self.gamma * self.y_inf) / (1.0 + self.gamma)


def randomize(sample: FieldSample, factor: CovarianceFactor, gamma: float,
              omega: np.ndarray | None = None) -> RandomizationSplit:
    """Split a field sample into selection and inference copies."""
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    if omega is None:
        z = noise_draws(sample.base_seed, sample.replicate, OMEGA_STREAM,
                        factor.grid.size)
        omega = factor.factor @ z
    omega = np.asarray(omega, dtype=float)
    root = np.sqrt(gamma)
    return RandomizationSplit(y_sel=sample.values + root * omega,
                              y_inf=sample.values - omega / root,
                              gamma=float(gamma))
