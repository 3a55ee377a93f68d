"""Shared small grids and bases for the unit tests."""
import numpy as np
import pytest

from modscat.core import ComplexField, FrequencyGrid, SpatialGrid
from modscat.dft import build_basis, orthonormalize


@pytest.fixture(scope="session")
def small_grids():
    return SpatialGrid.symmetric(40.0, 801), FrequencyGrid.contiguous(5.0, 64)


@pytest.fixture(scope="session")
def small_basis(small_grids):
    sg, fg = small_grids
    return build_basis(sg, fg, cache=False)


@pytest.fixture(scope="session")
def free_basis():
    sg = SpatialGrid.symmetric(60.0, 1201)
    return build_basis(sg, FrequencyGrid.contiguous(8.0, 400), free=True)


@pytest.fixture(scope="session")
def orth_basis(small_basis):
    return orthonormalize(small_basis, cache=False)


def gaussian(grid, center=0.0, width=1.0, k0=0.0):
    x = grid.x
    return ComplexField(grid, np.exp(-(((x - center) / width) ** 2) + 1j * k0 * x))
