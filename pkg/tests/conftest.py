"""Shared fixtures: the default kernel, its derivative bundle, small grids."""
import numpy as np
import pytest

from peakpost.field import Grid, covariance_factor
from peakpost.model import KernelSpec, derivative_bundle


@pytest.fixture(scope="session")
def kernel():
    return KernelSpec(length_scale=0.15, dimension=2)


@pytest.fixture(scope="session")
def bundle(kernel):
    return derivative_bundle(kernel)


@pytest.fixture(scope="session")
def grid24():
    return Grid(shape=(24, 24), domain=np.array([[-1.0, 1.0], [-1.0, 1.0]]))


@pytest.fixture(scope="session")
def factor24(kernel, grid24):
    return covariance_factor(kernel, grid24)
