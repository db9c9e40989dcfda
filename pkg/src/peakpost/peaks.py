"""Local maxima of a gridded field, with sub-grid refinement.

A candidate peak is a grid node strictly above all 3^d - 1 neighbors and at
least two cells away from every boundary (so that finite-difference stencils
and the refinement step never leave the interior). Candidates whose
finite-difference Hessian fails to be negative definite are kept but flagged
degenerate rather than silently dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .field import Grid

BOUNDARY_CELLS = 2


@dataclass(frozen=True, eq=False)
class Peak:
    multi_index: tuple
    grid_index: int
    location: np.ndarray
    height: float
    grid_height: float
    neg_hessian: np.ndarray
    degenerate: bool


def fd_gradient(arr: np.ndarray, idx, spacings: np.ndarray) -> np.ndarray:
    """Central-difference gradient at a grid node (needs one-cell margin)."""
    d = arr.ndim
    g = np.zeros(d)
    for k in range(d):
        up = list(idx)
        dn = list(idx)
        up[k] += 1
        dn[k] -= 1
        g[k] = (arr[tuple(up)] - arr[tuple(dn)]) / (2.0 * spacings[k])
    return g


def fd_hessian(arr: np.ndarray, idx, spacings: np.ndarray) -> np.ndarray:
    """Central-difference Hessian at a grid node (needs one-cell margin)."""
    d = arr.ndim
    h = np.zeros((d, d))
    v0 = arr[tuple(idx)]
    for k in range(d):
        up = list(idx)
        dn = list(idx)
        up[k] += 1
        dn[k] -= 1
        h[k, k] = (arr[tuple(up)] - 2.0 * v0 + arr[tuple(dn)]) / spacings[k] ** 2
    for i in range(d):
        for j in range(i + 1, d):
            pp = list(idx); pm = list(idx); mp = list(idx); mm = list(idx)
            pp[i] += 1; pp[j] += 1
            pm[i] += 1; pm[j] -= 1
            mp[i] -= 1; mp[j] += 1
            mm[i] -= 1; mm[j] -= 1
            val = (arr[tuple(pp)] - arr[tuple(pm)] - arr[tuple(mp)] + arr[tuple(mm)])
            h[i, j] = h[j, i] = val / (4.0 * spacings[i] * spacings[j])
    return h


def refine_peak(grid: Grid, values: np.ndarray, multi_index) -> Peak:
    """Refine one candidate node by a single damped Newton step.

    The step s = -H^{-1} g from the local quadratic model is scaled so that
    no component exceeds one grid cell; the refined height is the quadratic
    model value at the accepted step and never falls below the grid value.
    Degenerate candidates (H not negative definite) are returned unrefined.
    """
    arr = grid.reshape(values)
    idx = tuple(int(i) for i in multi_index)
    v0 = float(arr[idx])
    hess = fd_hessian(arr, idx, grid.spacings)
    hess = 0.5 * (hess + hess.T)
    node = grid.location(idx)
    if np.linalg.eigvalsh(hess)[-1] >= 0.0:
        return Peak(multi_index=idx, grid_index=grid.flat_index(idx),
                    location=node, height=v0, grid_height=v0,
                    neg_hessian=-hess, degenerate=True)
    g = fd_gradient(arr, idx, grid.spacings)
    step = -np.linalg.solve(hess, g)
    over = np.abs(step) / grid.spacings
    lam = min(1.0, 1.0 / float(np.max(over))) if np.max(over) > 0 else 1.0
    s = lam * step
    height = v0 + float(g @ s) + 0.5 * float(s @ hess @ s)
    return Peak(multi_index=idx, grid_index=grid.flat_index(idx),
                location=node + s, height=height, grid_height=v0,
                neg_hessian=-hess, degenerate=False)


def find_local_maxima(grid: Grid, values: np.ndarray) -> list:
    """All interior strict local maxima of the field, refined and sorted.

    Sorted by refined height descending, ties broken lexicographically on the
    multi-index.
    """
    arr = grid.reshape(values)
    d = arr.ndim
    core = tuple(slice(BOUNDARY_CELLS, m - BOUNDARY_CELLS) for m in arr.shape)
    if any(m <= 2 * BOUNDARY_CELLS for m in arr.shape):
        return []
    center = arr[core]
    mask = np.ones(center.shape, dtype=bool)
    for offset in itertools.product((-1, 0, 1), repeat=d):
        if all(o == 0 for o in offset):
            continue
        shifted = tuple(slice(BOUNDARY_CELLS + o, m - BOUNDARY_CELLS + o)
                        for o, m in zip(offset, arr.shape))
        mask &= center > arr[shifted]
    hits = np.argwhere(mask) + BOUNDARY_CELLS
    peaks = [refine_peak(grid, values, tuple(h)) for h in hits]
    peaks.sort(key=lambda p: (-p.height, p.multi_index))
    return peaks


def peak_hessian_inf(grid: Grid, values: np.ndarray, location) -> np.ndarray:
    """Negated Hessian (-hess) of a field at an arbitrary interior location.

    Finite-difference Hessians at the 2^d surrounding nodes, multilinearly
    interpolated, symmetrized, and negated to the same curvature convention
    as Peak.neg_hessian. Used to evaluate the inference field's curvature at
    a peak detected on another field.
    """
    arr = grid.reshape(values)
    loc = np.asarray(location, dtype=float)
    d = arr.ndim
    frac = np.empty(d)
    base = np.empty(d, dtype=int)
    for k in range(d):
        ax = grid.axes[k]
        pos = (loc[k] - ax[0]) / grid.spacings[k]
        i0 = int(np.floor(pos))
        i0 = min(max(i0, 0), arr.shape[k] - 2)
        f = pos - i0
        if i0 < 1 or i0 > arr.shape[k] - 3:
            raise DomainError("location too close to the boundary for a Hessian stencil")
        base[k] = i0
        frac[k] = f
    h = np.zeros((d, d))
    for corner in itertools.product((0, 1), repeat=d):
        w = 1.0
        idx = []
        for k in range(d):
            w *= frac[k] if corner[k] else (1.0 - frac[k])
            idx.append(base[k] + corner[k])
        if w == 0.0:
            continue
        h += w * fd_hessian(arr, tuple(idx), grid.spacings)
    return -0.5 * (h + h.T)
