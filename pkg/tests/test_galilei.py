import numpy as np
import pytest

from modscat.core import ComplexField, l2_norm
from modscat.dft import forward
from modscat.galilei import (
    apply_J0,
    apply_JV,
    apply_JV_conjugated,
    compare_fields,
    cubic_ratio,
    jv_norm,
    nullform_relative,
    nullform_residual,
)
from modscat.prop import evolve_linear, evolve_spectrum

from conftest import gaussian


def test_J0_on_gaussian():
    from modscat.core import SpatialGrid

    g = SpatialGrid.symmetric(20.0, 801)
    f = gaussian(g)
    t = 1.5
    exact = (1 + 4j * t) * g.x * f.values
    assert np.abs(apply_J0(f, t).values - exact).max() < 1e-10


def test_JV_reduces_to_J0_without_potential(free_basis):
    f = gaussian(free_basis.sgrid, width=2.0)
    t = 0.8
    a = apply_JV(f, t, free_basis).values
    b = apply_J0(f, t).values
    assert l2_norm(a - b, f.weights) / l2_norm(b, f.weights) < 1e-6


def test_JV_commutes_with_flow(orth_basis):
    f = gaussian(orth_basis.sgrid, width=2.0)
    t = 0.6
    a = apply_JV(f, t, orth_basis).values
    b = apply_JV_conjugated(f, t, orth_basis).values
    assert l2_norm(a - b, f.weights) / l2_norm(a, f.weights) < 1e-6


def test_jv_norm_is_conserved_by_linear_flow(small_basis):
    spec = forward(gaussian(small_basis.sgrid), small_basis)
    n0 = jv_norm(spec, 0.0)
    for t in (1.0, 30.0, 500.0):
        assert jv_norm(evolve_spectrum(spec, t), t) == pytest.approx(n0, rel=1e-12)


def test_compare_fields_free(free_basis):
    f = evolve_linear(gaussian(free_basis.sgrid, width=2.0), 1.0, free_basis)
    r = compare_fields(f, 1.0, free_basis)
    assert r.norm_JV == pytest.approx(r.norm_J0, rel=1e-5)
    assert r.comparison_ratio == pytest.approx(r.norm_J0 / (r.norm_J0 + r.norm_f))


def test_nullform_identity_holds_pointwise(free_basis):
    u = evolve_linear(gaussian(free_basis.sgrid, k0=0.5), 2.0, free_basis)
    assert nullform_relative(u, 2.0) < 1e-7
    assert nullform_residual(u.with_values(0 * u.values), 2.0) == 0.0
    assert nullform_relative(u.with_values(0 * u.values), 2.0) == 0.0


def test_cubic_ratio_scales_with_amplitude(free_basis):
    u = evolve_linear(gaussian(free_basis.sgrid, width=2.0), 1.0, free_basis)
    r1 = cubic_ratio(u, 2.0, free_basis)
    r2 = cubic_ratio(u * 0.1, 2.0, free_basis)
    # both sides are cubic in u
    assert r2.ratio == pytest.approx(r1.ratio, rel=1e-8)
    assert r2.lhs == pytest.approx(1e-3 * r1.lhs, rel=1e-8)


def test_cubic_ratio_needs_late_time(free_basis):
    with pytest.raises(ValueError):
        cubic_ratio(gaussian(free_basis.sgrid), 0.5, free_basis)
