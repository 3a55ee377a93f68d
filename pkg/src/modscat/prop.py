"""Linear evolution ``e^{itL}`` in the distorted basis and decay-rate fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComplexField, SpectralField
from .dft import DistortedBasis, forward, inverse, inverse_values


class HorizonError(ValueError):
    """Requested times let the fastest retained wave reach the grid edge."""


def evolve_spectrum(spec: SpectralField, t: float) -> SpectralField:
    """Multiply by ``e^{i t xi^2}``."""
    return spec.with_values(np.exp(1j * t * spec.coords**2) * spec.values)


def evolve_linear(f: ComplexField, t: float, basis: DistortedBasis) -> ComplexField:
    """``e^{itL} f = inverse(e^{it xi^2} forward(f))``."""
    return inverse(evolve_spectrum(forward(f, basis), t), basis)


def horizon(basis: DistortedBasis, xi_cut: float | None = None) -> float:
    """Largest ``t`` with ``2 xi_cut t < x_max``; ``xi_cut`` defaults to ``xi_max``."""
    xi_cut = basis.fgrid.xi_max if xi_cut is None else xi_cut
    return basis.sgrid.x_max / (2 * xi_cut)


def spectral_peak(spec: SpectralField) -> float:
    """``|xi|`` where ``|f~|`` is largest."""
    return float(abs(spec.coords[int(np.argmax(np.abs(spec.values)))]))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ``log norm = slope * log t + intercept``."""

    times: tuple
    norms: tuple
    slope: float
    intercept: float

    def __post_init__(self):
        t = np.asarray(self.times)
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("fit times must be strictly increasing")


def fit_decay(times, values) -> DecayFit:
    """Power-law fit on positive samples."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    slope, intercept = np.polyfit(np.log(t), np.log(v), 1)
    return DecayFit(tuple(t), tuple(v), float(slope), float(intercept))


def _check_horizon(spec: SpectralField, times, basis: DistortedBasis):
    # the sup sits near x = 2 t xi_peak; it must still lie inside the box
    t_max = horizon(basis, max(spectral_peak(spec), 1e-12))
    if max(times) > t_max:
        raise HorizonError(
            f"t={max(times):.4g} exceeds the admissible horizon t<{t_max:.4g} for this data"
        )


def _sweep(f, basis, times, reducer):
    times = np.asarray(times, dtype=float)
    spec = forward(f, basis)
    _check_horizon(spec, times, basis)
    phases = np.exp(1j * np.outer(basis.fgrid.values**2, times))
    fields = inverse_values(spec.values[:, None] * phases, basis)
    return [reducer(fields[:, i], t) for i, t in enumerate(times)]


def linf_series(f: ComplexField, basis: DistortedBasis, times):
    """``||e^{itL} f||_inf`` at each time."""
    return _sweep(f, basis, times, lambda u, t: float(np.abs(u).max()))


def local_series(f: ComplexField, basis: DistortedBasis, times, gamma: float):
    """``sup_{|x| <= t^gamma} |e^{itL} f|`` at each time (grid points only)."""
    x = basis.sgrid.x

    def red(u, t):
        return float(np.abs(u[np.abs(x) <= t**gamma]).max())

    return _sweep(f, basis, times, red)


def dispersive_decay_fit(f: ComplexField, basis: DistortedBasis, times) -> DecayFit:
    """Fit the global sup-norm decay exponent over ``times``.

    Raises
    ------
    HorizonError
        If the spectral peak, which carries the sup, would travel past the
        grid end before the last time.
    """
    return fit_decay(times, linf_series(f, basis, times))


def local_decay_fit(f: ComplexField, basis: DistortedBasis, times, gamma: float) -> DecayFit:
    """Fit the decay exponent of the sup over the growing window ``|x| <= t^gamma``."""
    if not 0.5 <= gamma < 1:
        raise ValueError("gamma must lie in [1/2, 1)")
    return fit_decay(times, local_series(f, basis, times, gamma))
