"""Strang splitting for ``i u_t + L u = mu |u|^2 u`` starting at ``t = 1``.

The linear substep multiplies the distorted spectrum by ``e^{i xi^2 dt}``;
the nonlinear substep is the exact pointwise rotation
``u -> u exp(-i mu |u|^2 dt)``.  Both conserve the discrete mass up to the
round-trip accuracy of the transform.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import ComplexField, SpectralField, derivative_x, l2_norm
from .dft import DistortedBasis, forward_values, inverse_values, inverse
from .galilei import jv_norm
from .prop import evolve_linear

log = logging.getLogger(__name__)

B_DELTA = 0.1


class BlowUpError(FloatingPointError):
    """Non-finite values appeared in the solution."""

    def __init__(self, t: float):
        super().__init__(f"non-finite solution at t={t:.17g}")
        self.t = t


class AccuracyError(RuntimeError):
    """Mass drift exceeded the accuracy guard."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one NLS run.

    ``dt(t) = min(dt_max, dt0 * max(1, t/10))``: constant up to ``t = 10``,
    then growing linearly until capped.  ``mu = 0`` gives the linear flow.
    """

    mu: int = 1
    epsilon: float = 0.05
    t_end: float = 200.0
    dt0: float = 0.01
    dt_max: float = 0.1
    record_times: tuple = ()
    boundary_tol: float = 1e-8
    mass_tol: float = 1e-6

    def __post_init__(self):
        if self.mu not in (-1, 0, 1):
            raise ValueError("mu must be -1, 0 or +1")
        if not (0 < self.dt0 <= 0.01):
            raise ValueError("dt0 must lie in (0, 0.01]")
        if self.t_end < 1:
            raise ValueError("t_end must be >= 1")
        rt = np.asarray(self.record_times, dtype=float)
        if rt.size and (rt[0] < 1 or rt[-1] > self.t_end or np.any(np.diff(rt) <= 0)):
            raise ValueError("record_times must increase inside [1, t_end]")
        object.__setattr__(self, "record_times", tuple(float(r) for r in rt))

    def dt(self, t: float) -> float:
        return min(self.dt_max, self.dt0 * max(1.0, t / 10.0))


@dataclass(frozen=True, eq=False)
class EvolutionState:
    t: float
    u: ComplexField
    mass: float


@dataclass
class BootstrapSeries:
    """``A = t^{1/2} ||u||_inf`` and ``B = t^{-delta} ||<J_V> u||_2`` at recorded times."""

    times: list = field(default_factory=list)
    A_vals: list = field(default_factory=list)
    B_vals: list = field(default_factory=list)
    jv_norms: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    delta: float = B_DELTA

    def append(self, t, A, B, jv, mass):
        self.times.append(t)
        self.A_vals.append(A)
        self.B_vals.append(B)
        self.jv_norms.append(jv)
        self.masses.append(mass)

    def running_sup(self):
        """``(A(T), B(T))`` as running maxima."""
        return np.maximum.accumulate(self.A_vals), np.maximum.accumulate(self.B_vals)


@dataclass
class EvolutionResult:
    final: EvolutionState
    series: BootstrapSeries
    snapshots: dict
    aborted: str | None = None
    steps: int = 0


# --------------------------------------------------------------------------
# data


def gaussian_profile(x, width: float = 1.0, center: float = 0.0, k0: float = 0.0):
    """``exp(-((x - center)/width)^2 + i k0 x)``."""
    return np.exp(-(((x - center) / width) ** 2) + 1j * k0 * x)


def spectral_packet(
    xi,
    k0: float = 0.8,
    width: float = 0.3,
    left: float = 0.7,
    phase: float = 0.0,
    focus_x: float = 0.0,
    focus_t: float = 0.0,
):
    """Two Gaussian bumps ``exp(-(xi -+ k0)^2/width^2)`` in the distorted spectrum.

    The ``-k0`` bump is scaled by ``left`` and rotated by ``phase``.  The
    factor ``1 - exp(-xi^2/width^2)`` makes the spectrum vanish like
    ``xi^2`` at the origin, as it does for decaying data.  The factor
    ``exp(+-i focus_x xi - i focus_t xi^2)`` focuses the right (left) bump
    at ``x = -focus_x`` (``+focus_x``) at time ``focus_t``.
    """
    xi = np.asarray(xi, dtype=float)
    right = np.exp(-(((xi - k0) / width) ** 2) + 1j * focus_x * xi)
    lft = left * np.exp(-(((xi + k0) / width) ** 2) - 1j * focus_x * xi + 1j * phase)
    vanish = -np.expm1(-((xi / width) ** 2))
    return (right + lft) * vanish * np.exp(-1j * focus_t * xi**2)


def data_norm(f: ComplexField) -> float:
    """``||<x> f||_2 + ||f||_{H^1}``."""
    x, w = f.grid.x, f.weights
    jx = l2_norm(np.sqrt(1 + x**2) * f.values, w)
    h1 = np.sqrt(l2_norm(f.values, w) ** 2 + l2_norm(derivative_x(f).values, w) ** 2)
    return jx + h1


def initial_data(
    epsilon: float,
    basis: DistortedBasis,
    profile: str = "gaussian",
    **params,
) -> EvolutionState:
    """State at ``t = 1``: ``u = e^{iL} u_*`` with ``u_*`` scaled to data norm ``epsilon``.

    Parameters
    ----------
    profile : {"gaussian", "spectral"}
        ``gaussian``: ``u_* ~ exp(-((x-center)/width)^2 + i k0 x)``
        (default ``exp(-x^2)``).  ``spectral``: ``u_*`` is the inverse
        transform of :func:`spectral_packet`.
    """
    g = basis.sgrid
    if profile == "gaussian":
        shape = ComplexField(g, gaussian_profile(g.x, **params))
    elif profile == "spectral":
        spec = SpectralField(basis.fgrid, spectral_packet(basis.fgrid.values, **params))
        shape = inverse(spec, basis)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    if epsilon == 0:
        u_star = shape * 0.0
    else:
        u_star = shape * (epsilon / data_norm(shape))
    u = evolve_linear(u_star, 1.0, basis)
    return EvolutionState(1.0, u, l2_norm(u.values, u.weights) ** 2)


# --------------------------------------------------------------------------
# stepping


def _rotate(u: np.ndarray, mu: int, tau: float) -> np.ndarray:
    if mu == 0 or tau == 0:
        return u
    return u * np.exp(-1j * mu * tau * (u.real**2 + u.imag**2))


def strang_step(state: EvolutionState, dt: float, mu: int, basis: DistortedBasis) -> EvolutionState:
    """One Strang step of size ``dt``.

    Raises
    ------
    BlowUpError
        If the result is not finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = _rotate(state.u.values, mu, dt / 2)
    spec = forward_values(u, basis) * np.exp(1j * dt * basis.fgrid.values**2)
    u = _rotate(inverse_values(spec, basis), mu, dt / 2)
    t = state.t + dt
    if not np.all(np.isfinite(u)):
        raise BlowUpError(t)
    return EvolutionState(t, state.u.with_values(u), l2_norm(u, state.u.weights) ** 2)


def boundary_amplitude(u: np.ndarray, band: int | None = None) -> float:
    """``max |u|`` over the outermost grid points on both sides."""
    band = band or max(5, u.size // 2000)
    return float(max(np.abs(u[:band]).max(), np.abs(u[-band:]).max()))


def diagnostics(t: float, u: np.ndarray, basis: DistortedBasis, delta: float = B_DELTA):
    """``(A, B, ||J_V u||, mass)`` for one state."""
    w = basis.x_weights
    spec = SpectralField(basis.fgrid, forward_values(u, basis))
    jv = jv_norm(spec, t)
    mass = l2_norm(u, w) ** 2
    A = np.sqrt(t) * float(np.abs(u).max())
    B = t ** (-delta) * np.sqrt(mass + jv**2)
    return A, B, jv, mass


def evolve(
    config: SolverConfig,
    basis: DistortedBasis,
    state: EvolutionState | None = None,
    callbacks: Sequence[Callable[[EvolutionState], None]] = (),
    data: dict | None = None,
) -> EvolutionResult:
    """Advance from ``t = 1`` to ``config.t_end``.

    Steps are shortened to land exactly on every record time; at those
    times the state is stored, the bootstrap quantities are appended and
    ``callbacks`` run.  The run stops early, keeping what it has, once the
    amplitude at the grid edge exceeds ``boundary_tol * ||u||_inf``.

    Raises
    ------
    AccuracyError
        If the mass drifts by more than ``mass_tol`` relative.
    """
    if state is None:
        state = initial_data(config.epsilon, basis, **(data or {}))
    records = list(config.record_times)
    series = BootstrapSeries()
    snaps: dict[float, np.ndarray] = {}
    m0 = state.mass

    def record(st):
        A, B, jv, mass = diagnostics(st.t, st.u.values, basis)
        series.append(st.t, A, B, jv, mass)
        snaps[st.t] = st.u.values
        for cb in callbacks:
            cb(st)

    while records and records[0] <= state.t + 1e-12:
        record(state)
        records.pop(0)

    steps = 0
    aborted = None
    t_end = config.t_end
    while state.t < t_end - 1e-12:
        dt = config.dt(state.t)
        target = min(records[0] if records else t_end, t_end)
        if state.t + dt > target - 1e-9:
            dt = target - state.t
        state = strang_step(state, dt, config.mu, basis)
        steps += 1
        if records and abs(state.t - records[0]) <= 1e-9:
            state = EvolutionState(records[0], state.u, state.mass)
            record(state)
            records.pop(0)
        if m0 > 0:
            drift = abs(state.mass - m0) / m0
            if drift > config.mass_tol:
                raise AccuracyError(f"mass drift {drift:.3g} at t={state.t:.6g}")
            u = state.u.values
            if boundary_amplitude(u) > config.boundary_tol * np.abs(u).max():
                aborted = f"boundary amplitude above tolerance at t={state.t:.6g}"
                log.warning(aborted)
                break
    return EvolutionResult(state, series, snaps, aborted, steps)
