"""Jost solutions, the interior fundamental system, and the S-matrix.

The operator is ``L = -d^2/dx^2 + V`` with ``V(x) = 2/(1+x^2)``.  The Jost
solution ``f_+(x, xi)`` behaves like ``e^{i x xi}`` as ``x -> +inf``; it is
obtained by imposing the large-``x`` expansion

    f_+(x, xi) ~ h_+(x xi) (1 + xi^2 rho_10(x xi, xi)),   h_+(u) = e^{iu}(1 + i/u)

at a matching point ``x0`` and integrating the ODE inwards.  ``h_+`` solves the
equation with ``V`` replaced by its tail ``2/x^2`` exactly, and ``rho_10`` is
the first Volterra correction for the difference ``2/(1+x^2) - 2/x^2``.

Conventions
-----------
The Wronskian is ``W[f, g] = f g' - f' g`` throughout.  With
``f_-(x) = f_+(-x)`` this gives ``W[f_+, f_-] = -2 f_+(0) f_+'(0)`` and

    T(xi) = -2 i xi / W[f_+, f_-],
    R(xi) = -(1/2) (conj(f_+'(0))/f_+'(0) + conj(f_+(0))/f_+(0)).

In this convention the free problem has ``T = 1, R = 0`` and the
small-frequency law reads ``T(xi) = +(4i/9pi) xi^3 + ...``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson

from . import _ode
from .core import ComplexField, GridError, SpatialGrid, derivative_x

TOL_ODE = 1e-10
MATCH_MIN = 10.0  # minimal x0*xi at the matching point
RHO_SKIP = 50.0  # rho_10 correction is dropped once x0*xi exceeds this
DEFAULT_X0 = 400.0


class IntegrationError(RuntimeError):
    """Adaptive integration failed; ``x`` is where it stopped."""

    def __init__(self, msg: str, x: float):
        super().__init__(f"{msg} at x={x:.17g}")
        self.x = x


class MatchingPointError(ValueError):
    """The matching point is too close to the origin for the asymptotic data."""


class DegenerateWronskianError(ArithmeticError):
    """The Jost Wronskian is numerically zero."""


def potential(x):
    """``V(x) = 2/(1+x^2)``."""
    return 2.0 / (1.0 + np.asarray(x, dtype=float) ** 2)


def h_plus(u):
    """Outgoing solution ``e^{iu}(1 + i/u)`` of ``-h'' + 2h/u^2 = h``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("h_plus needs u > 0")
    return np.exp(1j * u) * (1 + 1j / u)


def h_plus_prime(u):
    """``d/du h_+(u)``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("h_plus needs u > 0")
    return np.exp(1j * u) * (1j - 1 / u - 1j / u**2)


# --------------------------------------------------------------------------
# first Volterra correction


@lru_cache(maxsize=1)
def _panel_rule(span: float = 200.0, panel: float = 0.5, order: int = 12):
    """Composite Gauss-Legendre offsets and weights on ``[0, span]``."""
    t, w = np.polynomial.legendre.leggauss(order)
    starts = np.arange(0.0, span, panel)
    s = (starts[:, None] + 0.5 * panel * (t + 1)).ravel()
    ws = np.tile(0.5 * panel * w, starts.size)
    return s, ws, span


def _kernel_parts(u, v, xi):
    e = np.exp(-2j * (u - v))
    k0 = (1 + e) * (v - u) - 1j * (1 - e) * (1 + u * v)
    dk0 = -2j * e * (v - u) - (1 + e) + 2 * e * (1 + u * v) - 1j * v * (1 - e)
    g = (v + 1j) / (v**4 * (v * v + xi * xi))
    return k0, dk0, g


def _rho10_pair(u: float, xi: float):
    if not u >= xi:
        raise ValueError(f"rho10 needs u >= xi (u={u}, xi={xi})")
    s, w, span = _panel_rule()
    v = u + s
    k0, dk0, g = _kernel_parts(u, v, xi)
    zu = u + 1j
    rho = np.dot(w, k0 * g) / zu
    drho = np.dot(w, (dk0 / zu - k0 / zu**2) * g)
    # non-oscillatory tail beyond u + span; the derivative's tail cancels
    vc = u + span
    rho += -1j / (3 * vc**3)
    return complex(rho), complex(drho)


def rho10(u, xi):
    """First Volterra iterate ``rho_10(u, xi)``, defined for ``u >= xi``.

    Computed as ``int_u^inf K0(u,v) (v+i) / ((u+i) v^4 (v^2+xi^2)) dv`` with
    ``K0 = (1+e)(v-u) - i(1-e)(1+uv)``, ``e = exp(-2i(u-v))``, using a
    composite Gauss rule on ``[u, u+200]`` and the asymptotic tail beyond.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.array([_rho10_pair(float(ui), float(xi))[0] for ui in u_arr])
    return out[0] if np.ndim(u) == 0 else out


def rho10_du(u, xi):
    """``d/du rho_10(u, xi)``."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.array([_rho10_pair(float(ui), float(xi))[1] for ui in u_arr])
    return out[0] if np.ndim(u) == 0 else out


def matching_data(xi: float, x0: float, free: bool = False) -> tuple[complex, complex]:
    """``(f_+(x0), f_+'(x0))`` from the large-``x`` expansion; ``xi`` may be negative."""
    k = abs(xi)
    if free:
        f, fp = np.exp(1j * k * x0), 1j * k * np.exp(1j * k * x0)
    else:
        u = x0 * k
        h, hp = complex(h_plus(u)), complex(h_plus_prime(u))
        if u < RHO_SKIP:
            rho, drho = _rho10_pair(u, k)
            f = h * (1 + k * k * rho)
            fp = k * (hp * (1 + k * k * rho) + h * k * k * drho)
        else:
            f, fp = h, k * hp
    if xi < 0:
        f, fp = np.conj(f), np.conj(fp)
    return complex(f), complex(fp)


# --------------------------------------------------------------------------
# integration


def _integrate(xi, x0, f0, g0, x_out, free, rtol=TOL_ODE, atol=TOL_ODE):
    x_out = np.ascontiguousarray(x_out, dtype=float)
    f, g, status, xs, _ = _ode.integrate(
        float(xi), 0.0 if free else 1.0, float(x0), complex(f0), complex(g0),
        x_out, rtol, atol, 2.0, 50_000_000,
    )
    if status == _ode.UNDERFLOW:
        raise IntegrationError("step size underflow", xs)
    if status == _ode.MAX_STEPS:
        raise IntegrationError("step budget exhausted", xs)
    return f, g


@dataclass(frozen=True, eq=False)
class JostSolution:
    """Samples of ``f_+(., xi)`` and its derivative on a grid.

    ``x0`` is the matching abscissa where the asymptotic data was imposed.
    ``free`` marks the ``V = 0`` oracle mode.
    """

    xi: float
    f: ComplexField
    fprime: ComplexField
    x0: float
    free: bool = False

    @property
    def grid(self) -> SpatialGrid:
        return self.f.grid


def default_x0(xi: float, x_max: float = DEFAULT_X0) -> float:
    """Matching point: ``x_max``, pushed out if needed so that ``x0*|xi| >= 10``."""
    return max(float(x_max), MATCH_MIN / abs(xi))


def integrate_jost_plus(
    xi: float,
    grid: SpatialGrid,
    x0: float | None = None,
    *,
    free: bool = False,
    tol: float = TOL_ODE,
) -> JostSolution:
    """Integrate ``f_+(., xi)`` from the matching point down across ``grid``.

    Parameters
    ----------
    xi : float
        Nonzero wave number.  Negative values give ``conj(f_+(., |xi|))``.
    grid : SpatialGrid
        Output grid.
    x0 : float, optional
        Matching point, at least ``grid.x_max``.  Defaults to ``grid.x_max``.
    free : bool
        ``V = 0`` oracle mode.

    Raises
    ------
    MatchingPointError
        If ``x0*|xi| < 10``.
    IntegrationError
        On step-size underflow.
    """
    if xi == 0:
        raise ValueError("xi must be nonzero")
    x0 = grid.x_max if x0 is None else float(x0)
    if x0 < grid.x_max:
        raise MatchingPointError("matching point must lie at or beyond the grid end")
    if x0 * abs(xi) < MATCH_MIN:
        raise MatchingPointError(
            f"x0*|xi| = {x0 * abs(xi):.3g} < {MATCH_MIN}; enlarge the grid or pass x0"
        )
    f0, g0 = matching_data(xi, x0, free)
    f, g = _integrate(abs(xi), x0, f0, g0, grid.x[::-1], free, tol, tol)
    return JostSolution(
        float(xi), ComplexField(grid, f[::-1]), ComplexField(grid, g[::-1]), x0, free
    )


def jost_minus(sol: JostSolution) -> JostSolution:
    """``f_-(x) = f_+(-x)``; requires a symmetric grid."""
    if not sol.grid.is_symmetric:
        raise GridError("jost_minus needs a symmetric grid")
    return JostSolution(
        sol.xi,
        sol.f.with_values(sol.f.values[::-1]),
        sol.fprime.with_values(-sol.fprime.values[::-1]),
        -sol.x0,
        sol.free,
    )


def _value_and_slope(obj):
    if isinstance(obj, JostSolution):
        return obj.f, obj.fprime
    if isinstance(obj, tuple):
        return obj
    return obj, derivative_x(obj)


def wronskian(f, g, x: float) -> complex:
    """``W[f, g](x) = f g' - f' g`` interpolated at ``x``.

    ``f`` and ``g`` may be :class:`JostSolution` objects, ``(value, slope)``
    field pairs, or bare fields (differentiated numerically).
    """
    fv, fd = _value_and_slope(f)
    gv, gd = _value_and_slope(g)
    if fv.grid != gv.grid:
        raise GridError("wronskian of fields on different grids")
    if isinstance(f, JostSolution) and isinstance(g, JostSolution) and abs(f.xi) != abs(g.xi):
        raise ValueError("wronskian of solutions at different energies")
    w = fv.values * gd.values - fd.values * gv.values
    xs = fv.grid.x
    if not xs[0] <= x <= xs[-1]:
        raise GridError(f"x={x} outside the grid")
    return complex(np.interp(x, xs, w.real) + 1j * np.interp(x, xs, w.imag))


def ode_defect(sol: JostSolution, substeps: int = 32) -> float:
    """Largest per-cell residual of the sampled solution, relative to ``1+|f|``.

    Each grid cell is re-integrated from its left samples with ``substeps``
    classical RK4 steps; the mismatch with the right samples, divided by the
    cell width, measures how well the samples satisfy
    ``-f'' + V f = xi^2 f``.
    """
    x = sol.grid.x
    f = sol.f.values[:-1].copy()
    g = sol.fprime.values[:-1].copy()
    k2 = sol.xi**2
    strength = 0.0 if sol.free else 1.0
    h = sol.grid.dx / substeps
    xc = x[:-1].copy()

    def rhs(xx, ff, gg):
        return gg, (strength * potential(xx) - k2) * ff

    for _ in range(substeps):
        a1, b1 = rhs(xc, f, g)
        a2, b2 = rhs(xc + h / 2, f + h / 2 * a1, g + h / 2 * b1)
        a3, b3 = rhs(xc + h / 2, f + h / 2 * a2, g + h / 2 * b2)
        a4, b4 = rhs(xc + h, f + h * a3, g + h * b3)
        f = f + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        g = g + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        xc = xc + h
    df = np.abs(f - sol.f.values[1:])
    dg = np.abs(g - sol.fprime.values[1:])
    scale = 1.0 + np.abs(sol.f.values[1:])
    return float(np.max(np.maximum(df, dg / (1 + abs(sol.xi))) / scale) / sol.grid.dx)


# --------------------------------------------------------------------------
# zero energy and the interior system


def zero_energy_pair(grid: SpatialGrid) -> tuple[ComplexField, ComplexField]:
    """``f_1 = 1+x^2`` and ``f_2 = (pi/2 - arctan x)(1+x^2) - x``, both in ``ker L``."""
    x = grid.x
    # arccot without cancellation for large positive x
    acot = np.where(x > 0, np.arctan(1 / np.where(x > 0, x, 1.0)), np.pi / 2 - np.arctan(x))
    f1 = 1 + x**2
    f2 = acot * (1 + x**2) - x
    return ComplexField(grid, f1), ComplexField(grid, f2)


def zero_energy_slopes(grid: SpatialGrid) -> tuple[ComplexField, ComplexField]:
    """Exact derivatives of :func:`zero_energy_pair`."""
    x = grid.x
    acot = np.where(x > 0, np.arctan(1 / np.where(x > 0, x, 1.0)), np.pi / 2 - np.arctan(x))
    return ComplexField(grid, 2 * x), ComplexField(grid, 2 * x * acot - 2)


def tau0(x):
    """``(3x^2 + 8 + 4 log(x^2+1) - 8/(x^2+1)) / 30``, the leading ``tau`` at zero energy."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("tau0 is defined for x >= 0")
    x2 = x * x
    return (3 * x2 + 8 + 4 * np.log1p(x2) - 8 / (x2 + 1)) / 30


@dataclass(frozen=True, eq=False)
class PhiSystem:
    """Interior solutions ``phi_1, phi_2`` on the half-line grid ``[0, delta/xi]``.

    ``phi_1(0) = 1, phi_1'(0) = 0``; ``phi_2 = phi_1 int_x^{delta/xi} phi_1^{-2}``.
    Iterating yields ``(phi1, phi2)``.
    """

    xi: float
    delta: float
    phi1: ComplexField
    dphi1: ComplexField
    phi2: ComplexField
    dphi2: ComplexField

    def __iter__(self):
        return iter((self.phi1, self.phi2))


def phi_system(
    xi: float, delta: float = 0.5, x_max: float = DEFAULT_X0, dx: float = 0.005
) -> PhiSystem:
    """Build ``phi_1`` by integration from the origin and ``phi_2`` by reduction of order.

    Raises
    ------
    GridError
        If ``delta/xi > x_max``.
    ValueError
        If ``phi_1/(1+x^2)`` leaves ``[1/2, 3/2]``, meaning ``delta`` is too large.
    """
    if not 0 < xi <= 1:
        raise ValueError("phi_system needs 0 < xi <= 1")
    X = delta / xi
    if X > x_max:
        raise GridError(f"delta/xi = {X:.6g} exceeds the grid end {x_max}")
    cells = 2 * max(50, int(np.ceil(X / (2 * dx))))
    grid = SpatialGrid(0.0, X, cells + 1)
    x = grid.x
    p1, d1 = _integrate(xi, 0.0, 1.0, 0.0, x, False)
    ratio = p1.real / (1 + x**2)
    if ratio.min() < 0.5 or ratio.max() > 1.5:
        raise ValueError(f"delta={delta} too large: phi_1 leaves [1/2, 3/2](1+x^2)")
    inv2 = 1.0 / p1.real**2
    # I(x) = int_x^X phi_1^{-2}
    tail = cumulative_simpson(inv2[::-1], dx=grid.dx, initial=0.0)[::-1]
    p2 = p1 * tail
    d2 = d1 * tail - 1.0 / p1
    return PhiSystem(
        float(xi), float(delta),
        ComplexField(grid, p1), ComplexField(grid, d1),
        ComplexField(grid, p2), ComplexField(grid, d2),
    )


@dataclass(frozen=True)
class ConnectionData:
    """``f_+ = c1 phi_1 + c2 phi_2`` on ``[0, delta/xi]`` and the coefficients at ``x = 0``."""

    xi: float
    c1: complex
    c2: complex
    tilde_c1: complex
    tilde_c2: complex
    x_eval: float


def connection_coeffs(xi: float, delta: float = 0.5) -> ConnectionData:
    """Connection coefficients between ``f_+`` and the interior system.

    ``c1 = W[f_+, phi_2]`` and ``c2 = -W[f_+, phi_1]`` are evaluated at the
    grid node nearest ``min(10, delta/(2 xi))``;
    ``tilde_c1 = -c1 phi_2(0) + 2 c2`` and ``tilde_c2 = c2``.
    """
    ps = phi_system(xi, delta)
    x = ps.phi1.grid.x
    j = int(np.argmin(np.abs(x - min(10.0, delta / (2 * xi)))))
    xc = float(x[j])
    x0 = default_x0(xi)
    f0, g0 = matching_data(xi, x0)
    f, g = _integrate(xi, x0, f0, g0, np.array([xc]), False)
    fv, fd = f[0], g[0]
    c1 = fv * ps.dphi2.values[j] - fd * ps.phi2.values[j]
    c2 = -(fv * ps.dphi1.values[j] - fd * ps.phi1.values[j])
    tc1 = -c1 * ps.phi2.values[0] + 2 * c2
    return ConnectionData(float(xi), complex(c1), complex(c2), complex(tc1), complex(c2), xc)


# --------------------------------------------------------------------------
# scattering coefficients


@dataclass(frozen=True)
class ScatteringCoeffs:
    """``T``, ``R`` and ``W = W[f_+, f_-]`` at one wave number."""

    xi: float
    T: complex
    R: complex
    W: complex
    t0_estimate: complex

    @property
    def unitarity_defect(self) -> float:
        return abs(abs(self.T) ** 2 + abs(self.R) ** 2 - 1.0)


def coeffs_from_origin(xi: float, f0: complex, fp0: complex) -> ScatteringCoeffs:
    """Scattering data from ``f_+(0, |xi|)`` and ``f_+'(0, |xi|)``."""
    k = abs(xi)
    W = -2.0 * f0 * fp0
    if not np.isfinite(W) or abs(W) < 1e-300 or f0 == 0 or fp0 == 0:
        raise DegenerateWronskianError(f"W[f+, f-] vanishes numerically at xi={xi}")
    T = -2j * k / W
    R = -0.5 * (np.conj(fp0) / fp0 + np.conj(f0) / f0)
    if xi < 0:
        T, R, W = np.conj(T), np.conj(R), np.conj(W)
    return ScatteringCoeffs(float(xi), complex(T), complex(R), complex(W), complex(T / xi**3))


def scattering_coeffs(
    xi: float, *, x0: float | None = None, free: bool = False, tol: float = TOL_ODE
) -> ScatteringCoeffs:
    """``T(xi)``, ``R(xi)`` from ``f_+`` integrated down to the origin.

    Negative ``xi`` returns the conjugate data, ``T(-xi) = conj(T(xi))``.
    The matching point defaults to ``max(400, 10/|xi|)``.
    """
    if xi == 0:
        raise ValueError("xi must be nonzero")
    k = abs(xi)
    x0 = default_x0(k) if x0 is None else float(x0)
    if x0 * k < MATCH_MIN:
        raise MatchingPointError(f"x0*|xi| = {x0 * k:.3g} < {MATCH_MIN}")
    f0, g0 = matching_data(k, x0, free)
    f, g = _integrate(k, x0, f0, g0, np.array([0.0]), free, tol, tol)
    return coeffs_from_origin(xi, f[0], g[0])


def scattering_sweep(xis, **kw) -> list[ScatteringCoeffs]:
    """:func:`scattering_coeffs` over many wave numbers."""
    return [scattering_coeffs(float(k), **kw) for k in xis]
