import numpy as np
import pytest

from modscat.core import ComplexField, GridError, SpatialGrid, SpectralField
from modscat.dft import (
    BasisError,
    band_truncation_estimate,
    build_basis,
    column_residual,
    deriv_norm_checks,
    forward,
    gram_matrix,
    inverse,
    plancherel_defect,
    roundtrip_defect,
    smoothstep_chi,
    split_ab,
)

from conftest import gaussian


def test_free_transform_of_gaussian(free_basis):
    f = gaussian(free_basis.sgrid)
    spec = forward(f, free_basis)
    xi = spec.coords
    exact = np.exp(-(xi**2) / 4) / np.sqrt(2)
    assert np.abs(spec.values - exact).max() < 1e-10


def test_free_plancherel_and_roundtrip(free_basis):
    f = gaussian(free_basis.sgrid, center=3.0)
    assert plancherel_defect(f, free_basis) < 1e-10
    # limited by the band edge xi_max = 8
    assert roundtrip_defect(f, free_basis) < 1e-5


def test_potential_plancherel_small_box(small_basis):
    for c in (0.0, 5.0):
        f = gaussian(small_basis.sgrid, center=c)
        assert plancherel_defect(f, small_basis) < 1e-4


def test_negative_frequencies_are_mirrored(small_basis):
    m = small_basis.fgrid.m
    k = 7
    assert np.array_equal(small_basis.column(m - 1 - k), small_basis.E[::-1, k])
    full = small_basis.full_matrix()
    assert full.shape == (small_basis.sgrid.n, 2 * m)
    assert np.array_equal(full[:, m + k], small_basis.E[:, k])


def test_columns_solve_eigen_equation(small_basis):
    for k in (0, 20, 63):
        assert column_residual(small_basis, k) < 1e-6


def test_real_even_data_has_symmetric_spectrum(small_basis):
    # e(x, -xi) = e(-x, xi), so even data give an even spectrum
    spec = forward(gaussian(small_basis.sgrid), small_basis)
    assert np.allclose(spec.values, spec.values[::-1], atol=1e-14)


def test_spectrum_vanishes_at_zero_energy(small_basis):
    spec = forward(gaussian(small_basis.sgrid), small_basis)
    m = small_basis.fgrid.m
    a = np.abs(spec.values[m:])
    xi = small_basis.fgrid.positive
    # T(0) = 0 forces f~(xi) = O(xi^2) near the threshold
    assert a[0] / a.max() < 0.05
    assert band_truncation_estimate(spec) < 1e-3 * np.sqrt(np.sum(a**2) * xi[1])


def test_orthonormalized_gram_is_identity(orth_basis, small_basis):
    S = gram_matrix(orth_basis)
    assert np.abs(S - np.eye(S.shape[0])).max() < 1e-8
    assert orth_basis.orthonormal
    assert orth_basis.gram_defect == pytest.approx(
        np.abs(gram_matrix(small_basis) - np.eye(S.shape[0])).max()
    )


def test_orthonormal_roundtrip_on_spectra(orth_basis):
    fg = orth_basis.fgrid
    rng = np.random.default_rng(0)
    g = SpectralField(fg, rng.normal(size=2 * fg.m) + 1j * rng.normal(size=2 * fg.m))
    back = forward(inverse(g, orth_basis), orth_basis)
    assert np.abs(back.values - g.values).max() < 1e-8


def test_grid_mismatch_rejected(small_basis):
    other = SpatialGrid.symmetric(10.0, 101)
    with pytest.raises(GridError):
        forward(gaussian(other), small_basis)


def test_basis_needs_odd_symmetric_grid(small_grids):
    _, fg = small_grids
    with pytest.raises(GridError):
        build_basis(SpatialGrid.symmetric(10.0, 100), fg, free=True)


def test_basis_error_names_frequency(small_grids):
    from modscat.core import FrequencyGrid

    sg = SpatialGrid.symmetric(5.0, 101)
    with pytest.raises(BasisError) as info:
        build_basis(sg, FrequencyGrid(1e-9, 1.0, 4), cache=False)
    assert "1e-09" in str(info.value) or info.value.args[0] == pytest.approx(1e-9)


def test_smoothstep_chi():
    assert smoothstep_chi(0.4) == 0.0
    assert smoothstep_chi(1.2) == 1.0
    assert smoothstep_chi(0.75) == pytest.approx(0.5)


def test_ab_split_reconstructs(small_basis):
    for xi in (0.3, 2.0):
        s = split_ab(xi, small_basis)
        assert s.defect < 1e-8


def test_ab_split_rejects_nonpositive(small_basis):
    with pytest.raises(ValueError):
        split_ab(-1.0, small_basis)


def test_free_derivative_norms_match(free_basis):
    # in the free case ||f'|| = ||xi f~|| and ||x f|| = ||f~'||
    r = deriv_norm_checks(gaussian(free_basis.sgrid, width=2.0), free_basis)
    assert r["deriv_vs_spec_weight"] == pytest.approx(1.0, rel=1e-5)
    assert r["weight_vs_spec_deriv"] == pytest.approx(1.0, rel=1e-4)
