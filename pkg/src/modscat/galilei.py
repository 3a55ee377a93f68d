"""Galilei vector fields, their comparison, and cubic-term monitors.

``J_0(t) = x - 2it d/dx`` is the free field.  Its distorted analogue ``J_V(t)``
acts on the distorted spectrum as ``i d/dxi + 2t xi`` and commutes with
``e^{itL}`` in the sense ``J_V(t) e^{itL} = e^{itL} J_V(0)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComplexField, SpectralField, derivative_xi, fft_derivative_x, l2_norm
from .dft import DistortedBasis, forward, inverse
from .prop import evolve_linear


def apply_J0(f: ComplexField, t: float) -> ComplexField:
    """``x f - 2it f'`` with a pseudo-spectral derivative."""
    return f.with_values(f.grid.x * f.values - 2j * t * fft_derivative_x(f).values)


def jv_spectrum(spec: SpectralField, t: float) -> SpectralField:
    """``(i d/dxi + 2t xi) f~``, evaluated as ``e^{it xi^2} i d/dxi (e^{-it xi^2} f~)``.

    The two forms agree exactly; the second keeps the fast phase out of the
    finite differences.
    """
    phase = np.exp(1j * t * spec.coords**2)
    slow = spec.with_values(np.conj(phase) * spec.values)
    return spec.with_values(1j * phase * derivative_xi(slow).values)


def apply_JV(f: ComplexField, t: float, basis: DistortedBasis) -> ComplexField:
    """``J_V(t) f`` through the distorted transform."""
    return inverse(jv_spectrum(forward(f, basis), t), basis)


def apply_JV_conjugated(f: ComplexField, t: float, basis: DistortedBasis) -> ComplexField:
    """``e^{itL} J_V(0) e^{-itL} f``, an independent route to ``J_V(t) f``."""
    g = evolve_linear(f, -t, basis)
    return evolve_linear(apply_JV(g, 0.0, basis), t, basis)


def jv_norm(spec: SpectralField, t: float) -> float:
    """``||J_V(t) f||_2`` evaluated on the spectral side."""
    return l2_norm(jv_spectrum(spec, t).values, spec.weights)


@dataclass(frozen=True)
class GalileiReport:
    t: float
    norm_J0: float
    norm_JV: float
    norm_f: float
    comparison_ratio: float


def compare_fields(f: ComplexField, t: float, basis: DistortedBasis) -> GalileiReport:
    """Norms of ``J_0 f`` and ``J_V f`` and the ratio ``||J_0 f|| / (||J_V f|| + ||f||)``."""
    w = f.weights
    n0 = l2_norm(apply_J0(f, t).values, w)
    nv = l2_norm(apply_JV(f, t, basis).values, w)
    nf = l2_norm(f.values, w)
    den = nv + nf
    return GalileiReport(float(t), n0, nv, nf, n0 / den if den > 0 else 0.0)


def _nullform_sides(u: ComplexField, s: float):
    u2 = np.abs(u.values) ** 2
    lhs = apply_J0(u.with_values(u2 * u.values), s).values
    ju = apply_J0(u, s).values
    rhs = 2 * ju * u2 - u.values**2 * np.conj(ju)
    return lhs, rhs


def nullform_residual(u: ComplexField, s: float) -> float:
    """``|| J_0(|u|^2 u) - (2 |u|^2 J_0 u - u^2 conj(J_0 u)) ||_2``."""
    lhs, rhs = _nullform_sides(u, s)
    return l2_norm(lhs - rhs, u.weights)


def nullform_relative(u: ComplexField, s: float) -> float:
    """:func:`nullform_residual` divided by ``||J_0(|u|^2 u)||_2`` (0 for ``u = 0``)."""
    lhs, rhs = _nullform_sides(u, s)
    den = l2_norm(lhs, u.weights)
    return l2_norm(lhs - rhs, u.weights) / den if den > 0 else 0.0


@dataclass(frozen=True)
class CubicReport:
    s: float
    W: float
    lhs: float
    bound: float
    ratio: float


def cubic_ratio(u: ComplexField, s: float, basis: DistortedBasis) -> CubicReport:
    """Measure ``||J_V(s)(|u|^2 u)||`` against ``W(s)^2 s^{-1} (||J_V u|| + ||u||)``.

    ``W(s) = s^{1/2} ||u||_inf + s^{-1/10} ||J_V(s) u||_2``.
    """
    if s < 1:
        raise ValueError("cubic_ratio needs s >= 1")
    cubic = u.with_values(np.abs(u.values) ** 2 * u.values)
    spec_u = forward(u, basis)
    nju = jv_norm(spec_u, s)
    nu = l2_norm(u.values, u.weights)
    lhs = jv_norm(forward(cubic, basis), s)
    W = np.sqrt(s) * float(np.abs(u.values).max()) + s ** (-0.1) * nju
    bound = W**2 / s * (nju + nu)
    return CubicReport(float(s), float(W), float(lhs), float(bound), lhs / bound if bound > 0 else 0.0)
