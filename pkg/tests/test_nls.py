import numpy as np
import pytest

from modscat.core import ComplexField, l2_norm
from modscat.nls import (
    AccuracyError,
    EvolutionState,
    SolverConfig,
    boundary_amplitude,
    data_norm,
    evolve,
    initial_data,
    spectral_packet,
    strang_step,
)
from modscat.prop import evolve_linear

from conftest import gaussian


def test_time_step_schedule():
    c = SolverConfig(dt0=0.01, dt_max=0.1)
    assert c.dt(1.0) == 0.01
    assert c.dt(50.0) == pytest.approx(0.05)
    assert c.dt(1000.0) == 0.1


@pytest.mark.parametrize(
    "kw",
    [{"mu": 2}, {"dt0": 0.02}, {"t_end": 0.5}, {"t_end": 5.0, "record_times": (2.0, 1.5)}],
)
def test_solver_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_spectral_packet_vanishes_quadratically():
    xi = np.array([1e-3, 2e-3])
    a = np.abs(spectral_packet(xi, width=0.3))
    assert a[1] / a[0] == pytest.approx(4.0, rel=1e-2)


def test_data_norm_of_gaussian(free_basis):
    f = gaussian(free_basis.sgrid)
    # ||<x> f|| + ||f||_{H^1} in closed form for exp(-x^2)
    c = (np.pi / 2) ** 0.25
    expected = c * np.sqrt(1 + 0.25) + c * np.sqrt(1 + 1.0)
    assert data_norm(f) == pytest.approx(expected, rel=1e-4)


def test_initial_data_is_linear_flow_of_scaled_profile(free_basis):
    st = initial_data(0.05, free_basis)
    back = evolve_linear(st.u, -1.0, free_basis)
    assert data_norm(back) == pytest.approx(0.05, rel=1e-6)
    assert st.t == 1.0


def test_zero_coupling_is_linear_flow(free_basis):
    st = initial_data(0.05, free_basis)
    cfg = SolverConfig(mu=0, t_end=3.0, record_times=(3.0,))
    res = evolve(cfg, free_basis, st)
    exact = evolve_linear(st.u, 2.0, free_basis).values
    assert np.abs(res.snapshots[3.0] - exact).max() < 1e-10


def test_strang_is_second_order(free_basis):
    st = initial_data(1.0, free_basis, width=2.0)

    def run(dt):
        s = st
        for _ in range(int(round(0.4 / dt))):
            s = strang_step(s, dt, 1, free_basis)
        return s.u.values

    ref = run(0.0025)
    e1 = np.abs(run(0.02) - ref).max()
    e2 = np.abs(run(0.01) - ref).max()
    assert 3.0 < e1 / e2 < 5.0


def test_mass_conserved_and_records_hit(free_basis):
    cfg = SolverConfig(mu=1, epsilon=0.2, t_end=2.0, record_times=(1.0, 1.5, 2.0))
    res = evolve(cfg, free_basis)
    assert sorted(res.snapshots) == [1.0, 1.5, 2.0]
    m = np.array(res.series.masses)
    assert np.abs(m / m[0] - 1).max() < 1e-12
    assert res.aborted is None


def test_boundary_abort_keeps_partial_results(free_basis):
    st = initial_data(0.05, free_basis, center=0.0, k0=3.0)
    cfg = SolverConfig(t_end=20.0, record_times=(1.0, 20.0), boundary_tol=1e-8)
    res = evolve(cfg, free_basis, st)
    assert res.aborted is not None
    assert 1.0 in res.snapshots and 20.0 not in res.snapshots


def test_mass_drift_raises(free_basis):
    st = initial_data(0.05, free_basis)
    bad = EvolutionState(st.t, st.u, st.mass * 1.01)
    cfg = SolverConfig(t_end=1.1, mass_tol=1e-6)
    with pytest.raises(AccuracyError):
        evolve(cfg, free_basis, bad)


def test_boundary_amplitude():
    u = np.zeros(100, complex)
    u[0] = 1e-3
    assert boundary_amplitude(u) == pytest.approx(1e-3)
