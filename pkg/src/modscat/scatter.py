"""Wave-packet profiles and extraction of modified-scattering data.

For a solution ``u(x, t)`` the profile along the ray ``x = vt`` is

    alpha(v, t) = int u(x, t) conj(Psi_v(x, t)) dx,
    Psi_v(x, t) = exp(-i x^2/(4t)) chi((x - vt)/sqrt(t)),

with ``chi`` an even bump of unit integral supported in ``(-5, 5)``.  On the
outer region ``|v| >= 10 t^{-1/2}`` the profile obeys
``d alpha/dt = -i mu |alpha|^2 alpha / t + R`` with a decaying ``R``.  Removing
the logarithmic phase gives ``beta``, which converges to ``u_inf(v)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .core import ComplexField, SpatialGrid, l2_norm
from .prop import DecayFit, fit_decay

OUTER_CONST = 10.0


@lru_cache(maxsize=None)
def _bump_constant(radius: float) -> float:
    val, _ = quad(lambda y: np.exp(-1.0 / (1.0 - (y / radius) ** 2)), -radius, radius,
                  epsabs=0.0, epsrel=1e-12, limit=200)
    return 1.0 / val


@dataclass(frozen=True)
class BumpSpec:
    """``chi(y) = c exp(-1/(1 - (y/r)^2))`` on ``|y| < r``, zero outside, ``int chi = 1``."""

    support_radius: float = 5.0
    normalization: float = field(default=0.0)

    def __post_init__(self):
        if self.normalization == 0.0:
            object.__setattr__(self, "normalization", _bump_constant(self.support_radius))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        z = (y / self.support_radius) ** 2
        inside = z < 1
        out = np.zeros_like(y)
        out[inside] = self.normalization * np.exp(-1.0 / (1.0 - z[inside]))
        return out


def bump_chi(support_radius: float = 5.0) -> BumpSpec:
    return BumpSpec(support_radius)


def outer_mask(v, t) -> np.ndarray:
    """``|v| >= 10 t^{-1/2}``."""
    return np.abs(np.asarray(v)) >= OUTER_CONST / np.sqrt(t)


def profile_alpha(u: ComplexField, t: float, v_grid, chi: BumpSpec | None = None):
    """``alpha(v, t)`` for each ``v``; returns ``(alpha, valid)``.

    Packets whose support leaves the grid are omitted: ``alpha`` is NaN and
    ``valid`` is False there.
    """
    if t < 1:
        raise ValueError("profiles are defined for t >= 1")
    chi = chi or bump_chi()
    grid = u.grid
    x, w = grid.x, grid.weights
    v_grid = np.asarray(v_grid, dtype=float)
    half = chi.support_radius * np.sqrt(t)
    # demodulated field is slowly varying
    g = u.values * np.exp(1j * x**2 / (4 * t))
    alpha = np.full(v_grid.size, np.nan + 0j)
    valid = np.zeros(v_grid.size, dtype=bool)
    for i, v in enumerate(v_grid):
        lo, hi = v * t - half, v * t + half
        if lo < x[0] or hi > x[-1]:
            continue
        j0 = max(0, int(np.floor((lo - x[0]) / grid.dx)))
        j1 = min(grid.n, int(np.ceil((hi - x[0]) / grid.dx)) + 1)
        sl = slice(j0, j1)
        alpha[i] = np.dot(w[sl], g[sl] * chi((x[sl] - v * t) / np.sqrt(t)))
        valid[i] = True
    return alpha, valid


@dataclass
class ProfileSeries:
    """``alpha[i, n] = alpha(v_i, t_n)`` with validity and outer-region flags."""

    v_grid: np.ndarray
    times: np.ndarray
    alpha: np.ndarray
    valid: np.ndarray
    outer_mask: np.ndarray


def profile_series(snapshots: dict, grid: SpatialGrid, v_grid, chi: BumpSpec | None = None) -> ProfileSeries:
    """Profiles for every ``{t: u_values}`` snapshot, in time order."""
    times = np.array(sorted(snapshots))
    v_grid = np.asarray(v_grid, dtype=float)
    cols, vals = [], []
    for t in times:
        a, ok = profile_alpha(ComplexField(grid, snapshots[t]), t, v_grid, chi)
        cols.append(a)
        vals.append(ok)
    alpha = np.array(cols).T
    valid = np.array(vals).T
    outer = np.array([outer_mask(v_grid, t) for t in times]).T
    return ProfileSeries(v_grid, times, alpha, valid, outer)


def _ray_values(u: ComplexField, t: float, v_grid) -> np.ndarray:
    """``u(vt, t)`` by interpolating the demodulated field."""
    x = u.grid.x
    g = u.values * np.exp(1j * x**2 / (4 * t))
    xv = np.asarray(v_grid) * t
    gv = np.interp(xv, x, g.real) + 1j * np.interp(xv, x, g.imag)
    return gv * np.exp(-1j * xv**2 / (4 * t))


def profile_compare(u: ComplexField, t: float, alpha, v_grid, jv_norm: float) -> dict:
    """Compare ``u(vt, t)`` with ``t^{-1/2} e^{-itv^2/4} alpha(v, t)`` on valid ``v``.

    ``jv_norm`` is ``||J_V(t) u||_2``; ratios are taken against
    ``t^{-3/4} ||<J_V> u||`` and ``t^{-1} ||<J_V> u||``.
    """
    v = np.asarray(v_grid, dtype=float)
    a = np.asarray(alpha)
    ok = np.isfinite(a)
    if not ok.any():
        return {"linf_defect": 0.0, "l2_defect": 0.0, "linf_ratio": 0.0, "l2_ratio": 0.0}
    d = _ray_values(u, t, v[ok]) - t**-0.5 * np.exp(-1j * t * v[ok] ** 2 / 4) * a[ok]
    linf = float(np.abs(d).max())
    l2 = float(np.sqrt(np.trapezoid(np.abs(d) ** 2, v[ok]))) if ok.sum() > 1 else linf
    jap = np.sqrt(l2_norm(u.values, u.weights) ** 2 + jv_norm**2)
    return {
        "linf_defect": linf,
        "l2_defect": l2,
        "linf_ratio": linf / (t**-0.75 * jap) if jap > 0 else 0.0,
        "l2_ratio": l2 / (t**-1.0 * jap) if jap > 0 else 0.0,
    }


@dataclass
class ODEResidual:
    """``R(v, t)`` at interior record times, NaN where not evaluated."""

    times: np.ndarray
    R: np.ndarray
    sup_outer: np.ndarray
    fit: DecayFit | None


def ode_residual(series: ProfileSeries, mu: int, fit_window=None) -> ODEResidual:
    """Residual of ``d alpha/dt = -i mu |alpha|^2 alpha / t`` on the outer region.

    ``d alpha/dt`` is the second-order three-point derivative on the
    (possibly non-uniform) record times.  The decay exponent of
    ``sup_{Omega_t} |R|`` is fitted over ``fit_window`` (all times if None).
    """
    t = series.times
    if t.size < 3:
        raise ValueError("the ODE residual needs at least 3 record times")
    a = series.alpha
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    da = (
        -h1 / (h0 * (h0 + h1)) * a[:, :-2]
        + (h1 - h0) / (h0 * h1) * a[:, 1:-1]
        + h0 / (h1 * (h0 + h1)) * a[:, 2:]
    )
    ac = a[:, 1:-1]
    R = da + 1j * mu * np.abs(ac) ** 2 * ac / t[1:-1]
    use = series.outer_mask[:, 1:-1] & series.valid[:, :-2] & series.valid[:, 1:-1] & series.valid[:, 2:]
    R = np.where(use, R, np.nan)
    sup = np.array([np.nanmax(np.abs(R[:, k])) if use[:, k].any() else np.nan for k in range(R.shape[1])])
    tc = t[1:-1]
    sel = np.isfinite(sup) & (sup > 0)
    if fit_window is not None:
        sel &= (tc >= fit_window[0]) & (tc <= fit_window[1])
    fit = fit_decay(tc[sel], sup[sel]) if sel.sum() >= 2 else None
    return ODEResidual(tc, R, sup, fit)


@dataclass
class AsymptoticData:
    """Extracted ``u_inf(v)``, ``Phi_inf(v)`` at ``t_b`` and the Cauchy defects of ``beta``."""

    v_grid: np.ndarray
    u_inf: np.ndarray
    phi_inf: np.ndarray
    cauchy_defect: float
    t_b: float
    defects: dict
    outer: np.ndarray
    beta: np.ndarray


def phase_integral(series: ProfileSeries) -> np.ndarray:
    """``int_1^t s^{-1} |alpha(v, s)|^2 ds`` at each record time, trapezoid in ``log s``."""
    a2 = np.abs(series.alpha) ** 2
    ls = np.log(series.times)
    inc = 0.5 * (a2[:, 1:] + a2[:, :-1]) * np.diff(ls)
    return np.concatenate([np.zeros((a2.shape[0], 1)), np.cumsum(inc, axis=1)], axis=1)


def beta_series(series: ProfileSeries, mu: int) -> np.ndarray:
    """``beta = exp(i mu int_1^t s^{-1}|alpha|^2 ds) alpha``; ``|beta| = |alpha|``."""
    return np.exp(1j * mu * phase_integral(series)) * series.alpha


def _time_index(times, t):
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * max(1.0, t):
        raise ValueError(f"time {t} is not a record time")
    return k


def cauchy_defect(beta, series: ProfileSeries, t_hi: float, t_lo: float, mask) -> float:
    """``max_v |beta(v, t_hi) - beta(v, t_lo)|`` over ``mask``."""
    k1 = _time_index(series.times, t_hi)
    k0 = _time_index(series.times, t_lo)
    d = np.abs(beta[:, k1] - beta[:, k0])[mask]
    return float(np.nanmax(d)) if d.size else float("nan")


def extract_asymptotics(series: ProfileSeries, mu: int, t_b: float | None = None, amp_floor: float = 1e-3) -> AsymptoticData:
    """Limits ``u_inf = beta(., t_b)`` and ``Phi_inf = Phi(t_b)``.

    ``Phi(t) = int_1^t s^{-1}|alpha|^2 ds - log(t) |alpha(t)|^2``.  Cauchy
    defects are reported for the pairs ``(t_b, t_b/2)`` and
    ``(t_b/2, t_b/4)`` over the velocities lying in the outer region at
    ``t_b/4`` with valid packets at all three times.  ``phi_inf`` is NaN
    where ``|u_inf| <= amp_floor * max|u_inf|``.
    """
    times = series.times
    t_b = float(times[-1]) if t_b is None else float(t_b)
    if t_b < 4 * times[0]:
        raise ValueError("extraction needs t_b >= 4 t_a")
    kb = _time_index(times, t_b)
    beta = beta_series(series, mu)
    integ = phase_integral(series)
    u_inf = beta[:, kb].copy()
    phi = integ[:, kb] - np.log(t_b) * np.abs(series.alpha[:, kb]) ** 2
    ok = series.valid[:, kb]
    u_inf[~ok] = np.nan
    phi[~ok] = np.nan
    amp = np.abs(u_inf)
    floor = amp_floor * np.nanmax(amp) if np.isfinite(amp).any() else 0.0
    phi_out = np.where(amp > floor, phi, np.nan)

    defects = {}
    try:
        kq = _time_index(times, t_b / 4)
        kh = _time_index(times, t_b / 2)
        mask = series.outer_mask[:, kq] & series.valid[:, kq] & series.valid[:, kh] & ok
        defects[(t_b, t_b / 2)] = cauchy_defect(beta, series, t_b, t_b / 2, mask)
        defects[(t_b / 2, t_b / 4)] = cauchy_defect(beta, series, t_b / 2, t_b / 4, mask)
    except ValueError:
        pass
    cd = defects.get((t_b, t_b / 2), float("nan"))
    return AsymptoticData(
        series.v_grid, u_inf, phi_out, cd, t_b, defects, series.outer_mask[:, kb], beta
    )


def _spline(v, y):
    ok = np.isfinite(y)
    return CubicSpline(v[ok], y[ok], extrapolate=True), v[ok][0], v[ok][-1]


def ansatz(grid: SpatialGrid, t: float, asym: AsymptoticData, mu: int) -> np.ndarray:
    """``t^{-1/2} exp(-i x^2/4t - i mu |u_inf|^2 log t - i mu Phi_inf) u_inf`` at ``v = x/t``.

    ``u_inf`` and ``Phi_inf`` are cubic splines in ``v``, clamped to their end
    values outside the hull; missing ``Phi_inf`` values count as 0.
    """
    v = asym.v_grid
    sr, lo, hi = _spline(v, asym.u_inf.real)
    si, _, _ = _spline(v, asym.u_inf.imag)
    sp, _, _ = _spline(v, np.nan_to_num(asym.phi_inf, nan=0.0))
    vx = np.clip(grid.x / t, lo, hi)
    U = sr(vx) + 1j * si(vx)
    P = sp(vx)
    phase = -grid.x**2 / (4 * t) - mu * np.abs(U) ** 2 * np.log(t) - mu * P
    return t**-0.5 * np.exp(1j * phase) * U


def remainder(u: ComplexField, t: float, asym: AsymptoticData, mu: int) -> dict:
    """``||u - ansatz||_inf`` and ``||u - ansatz||_2``."""
    r = u.values - ansatz(u.grid, t, asym, mu)
    return {"linf": float(np.abs(r).max()), "l2": l2_norm(r, u.weights)}
