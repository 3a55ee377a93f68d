import numpy as np
import pytest

from modscat.core import SpatialGrid, derivative_x
from modscat.jost import (
    MatchingPointError,
    connection_coeffs,
    h_plus,
    h_plus_prime,
    integrate_jost_plus,
    jost_minus,
    ode_defect,
    potential,
    scattering_coeffs,
    tau0,
    wronskian,
    zero_energy_pair,
    zero_energy_slopes,
)


def test_h_plus_solves_bessel_type_equation():
    u = np.linspace(2.0, 30.0, 2001)
    h = h_plus(u)
    d2 = np.gradient(np.gradient(h, u), u)
    r = -d2 + 2 * h / u**2 - h
    assert np.abs(r[5:-5]).max() < 1e-3
    assert np.allclose(np.gradient(h, u)[5:-5], h_plus_prime(u)[5:-5], atol=1e-4)


def test_h_plus_rejects_nonpositive():
    with pytest.raises(ValueError):
        h_plus(0.0)


def test_free_mode_is_plane_wave():
    g = SpatialGrid.symmetric(20.0, 401)
    sol = integrate_jost_plus(1.3, g, free=True)
    assert np.abs(sol.f.values - np.exp(1.3j * g.x)).max() < 1e-8
    sc = scattering_coeffs(1.3, free=True)
    assert sc.T == pytest.approx(1.0, abs=1e-7)
    assert abs(sc.R) < 1e-8


@pytest.mark.parametrize("xi", [0.1, 0.7, 2.0, 6.0])
def test_unitarity(xi):
    assert scattering_coeffs(xi).unitarity_defect < 1e-6


def test_negative_xi_conjugates():
    a, b = scattering_coeffs(0.9), scattering_coeffs(-0.9)
    assert b.T == pytest.approx(np.conj(a.T), abs=1e-12)
    assert b.R == pytest.approx(np.conj(a.R), abs=1e-12)


def test_high_energy_transmission():
    # V is weak relative to 8^2, so T is close to 1 in modulus
    assert abs(scattering_coeffs(8.0).T) > 0.999


def test_low_energy_reflection():
    sc = scattering_coeffs(0.05)
    assert abs(sc.R - 1) < 0.01
    assert abs(sc.T) < 1e-3


def test_jost_ode_defect_and_wronskian():
    g = SpatialGrid.symmetric(20.0, 2001)
    sol = integrate_jost_plus(0.8, g, x0=400.0)
    assert ode_defect(sol) < 1e-7
    minus = jost_minus(sol)
    w = [wronskian(sol, minus, x) for x in (-10.0, 0.0, 7.5)]
    assert np.allclose(w, w[0], rtol=1e-7)


def test_matching_point_too_close():
    g = SpatialGrid.symmetric(5.0, 101)
    with pytest.raises(MatchingPointError):
        integrate_jost_plus(0.1, g)


def test_zero_energy_pair_in_kernel():
    g = SpatialGrid.symmetric(10.0, 4001)
    f1, f2 = zero_energy_pair(g)
    d1, d2 = zero_energy_slopes(g)
    for f, d in ((f1, d1), (f2, d2)):
        assert np.allclose(derivative_x(f).values[4:-4], d.values[4:-4], atol=1e-6)
        dd = derivative_x(d).values
        r = -dd + potential(g.x) * f.values
        assert np.abs(r[4:-4]).max() < 1e-6
    w = f1.values * d2.values - d1.values * f2.values
    assert np.allclose(w, -2.0, atol=1e-10)


def test_tau0_at_origin():
    assert tau0(0.0) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        tau0(-1.0)


def test_connection_leading_term():
    c = connection_coeffs(0.05)
    assert abs(0.05 * c.c2 + 3j) < 0.3
