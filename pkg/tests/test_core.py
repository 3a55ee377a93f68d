import numpy as np
import pytest

from modscat.core import (
    ComplexField,
    FrequencyGrid,
    GridError,
    SpatialGrid,
    SpectralField,
    composite_weights,
    derivative_x,
    derivative_xi,
    fd_derivative,
    fft_derivative_x,
    l2_norm,
    quadrature,
)


def test_symmetric_grid_is_exact_mirror():
    g = SpatialGrid.symmetric(10.0, 101)
    assert np.array_equal(g.x, -g.x[::-1])
    assert g.dx == pytest.approx(0.2)


def test_from_spacing_has_odd_count():
    g = SpatialGrid.from_spacing(17.0, 0.2)
    assert g.n % 2 == 1
    assert g.dx == pytest.approx(0.2)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1), (1.0, 0.0, 10)])
def test_bad_spatial_grid(args):
    with pytest.raises(GridError):
        SpatialGrid(*args)


def test_bad_frequency_grid():
    with pytest.raises(GridError):
        FrequencyGrid(0.0, 1.0, 10)


def test_contiguous_grid_is_uniform():
    fg = FrequencyGrid.contiguous(4.0, 50)
    assert fg.is_contiguous
    assert np.allclose(np.diff(fg.values), fg.dxi)
    # weights integrate 1 over [-xi_max, xi_max] up to the end half-cells
    assert fg.weights.sum() == pytest.approx(2 * fg.xi_max)


def test_split_grid_weights_exclude_band():
    fg = FrequencyGrid(0.5, 4.0, 36)
    assert not fg.is_contiguous
    assert fg.weights.sum() == pytest.approx(2 * (fg.xi_max - fg.xi_min))


@pytest.mark.parametrize("n", [11, 41])
def test_simpson_weights_integrate_cubic(n):
    x = np.linspace(0.0, 2.0, n)
    w = composite_weights(n, x[1] - x[0])
    assert np.dot(w, x**3) == pytest.approx(4.0, rel=1e-12)


def test_even_count_falls_back_to_trapezoid():
    x = np.linspace(0.0, 2.0, 12)
    w = composite_weights(12, x[1] - x[0])
    assert np.dot(w, x) == pytest.approx(2.0, rel=1e-12)


def test_gaussian_quadrature_and_norm():
    g = SpatialGrid.symmetric(20.0, 801)
    f = ComplexField(g, np.exp(-g.x**2).astype(complex))
    assert quadrature(f).real == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert l2_norm(f.values, f.weights) == pytest.approx((np.pi / 2) ** 0.25, rel=1e-12)


def test_fd_derivative_fourth_order():
    errs = []
    for n in (201, 401):
        x = np.linspace(0, 2 * np.pi, n)
        errs.append(np.abs(fd_derivative(np.sin(x), x[1] - x[0]) - np.cos(x)).max())
    assert errs[0] / errs[1] > 10


def test_spatial_derivatives_agree():
    g = SpatialGrid.symmetric(20.0, 801)
    f = ComplexField(g, np.exp(-g.x**2 + 2j * g.x))
    exact = (-2 * g.x + 2j) * f.values
    assert np.abs(derivative_x(f).values - exact).max() < 1e-4
    assert np.abs(fft_derivative_x(f).values - exact).max() < 1e-10


def test_derivative_xi_on_contiguous_grid():
    fg = FrequencyGrid.contiguous(6.0, 300)
    s = SpectralField(fg, np.exp(-fg.values**2).astype(complex))
    exact = -2 * fg.values * s.values
    assert np.abs(derivative_xi(s).values - exact).max() < 1e-5


def test_field_shape_checked():
    g = SpatialGrid.symmetric(1.0, 11)
    with pytest.raises((GridError, ValueError)):
        ComplexField(g, np.zeros(10, complex))
