import numpy as np
import pytest

from modscat.core import ComplexField, l2_norm
from modscat.dft import roundtrip_defect
from modscat.prop import (
    DecayFit,
    HorizonError,
    dispersive_decay_fit,
    evolve_linear,
    fit_decay,
    horizon,
    local_decay_fit,
)

from conftest import gaussian


def free_gaussian(x, t, width=1.0):
    z = 1 - 4j * t / width**2
    return np.exp(-(x**2) / (width**2 * z)) / np.sqrt(z)


def test_fit_decay_recovers_power_law():
    t = np.geomspace(1, 100, 9)
    fit = fit_decay(t, 3.0 * t**-0.7)
    assert fit.slope == pytest.approx(-0.7)
    assert fit.intercept == pytest.approx(np.log(3.0))


def test_decay_fit_requires_increasing_times():
    with pytest.raises(ValueError):
        DecayFit((1.0, 1.0), (1.0, 1.0), 0.0, 0.0)


def test_free_evolution_matches_closed_form(free_basis):
    g = free_basis.sgrid
    f = gaussian(g)
    for t in (0.5, 3.0):
        u = evolve_linear(f, t, free_basis).values
        exact = free_gaussian(g.x, t)
        assert l2_norm(u - exact, g.weights) / l2_norm(exact, g.weights) < 1e-7


def test_identity_at_time_zero(small_basis):
    f = gaussian(small_basis.sgrid)
    u = evolve_linear(f, 0.0, small_basis)
    err = l2_norm(u.values - f.values, f.weights) / l2_norm(f.values, f.weights)
    assert err <= 2 * roundtrip_defect(f, small_basis) + 1e-14


def test_group_property(orth_basis):
    f = gaussian(orth_basis.sgrid, center=2.0)
    a = evolve_linear(evolve_linear(f, 0.7, orth_basis), 1.1, orth_basis)
    b = evolve_linear(f, 1.8, orth_basis)
    assert np.abs(a.values - b.values).max() < 1e-8


def test_norm_preserved(orth_basis):
    f = gaussian(orth_basis.sgrid)
    u = evolve_linear(f, 2.0, orth_basis)
    ratio = l2_norm(u.values, u.weights) / l2_norm(f.values, f.weights)
    assert abs(ratio - 1) <= 2 * roundtrip_defect(f, orth_basis)


def test_horizon_uses_box_size(free_basis):
    assert horizon(free_basis, 1.0) == pytest.approx(free_basis.sgrid.x_max / 2)


def test_free_decay_exponents(free_basis):
    f = gaussian(free_basis.sgrid)
    times = np.geomspace(5.0, 20.0, 8)
    assert dispersive_decay_fit(f, free_basis, times).slope == pytest.approx(-0.5, abs=0.05)
    assert local_decay_fit(f, free_basis, times, 0.5).slope == pytest.approx(-0.5, abs=0.05)


def test_horizon_violation_reports_limit(free_basis):
    f = gaussian(free_basis.sgrid, k0=3.0)
    with pytest.raises(HorizonError, match="horizon"):
        dispersive_decay_fit(f, free_basis, [1.0, 50.0])


def test_local_decay_gamma_range(free_basis):
    with pytest.raises(ValueError):
        local_decay_fit(gaussian(free_basis.sgrid), free_basis, [1.0, 2.0], 1.0)
