"""Compiled Dormand-Prince 5(4) integrator for ``f'' = (V(x) - xi^2) f``.

The system is integrated as ``(f, f')`` with complex state.  Output at the
requested abscissae is produced by quintic Hermite interpolation through
``f, f', f''`` (and ``f', f'', f'''`` for the derivative) at each accepted
step's endpoints.  This is fifth-order accurate and needs no extra stages,
because the equation itself supplies the higher derivatives.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# status codes
OK = 0
UNDERFLOW = 1
MAX_STEPS = 2

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True)
def _pot(x, strength):
    return strength * 2.0 / (1.0 + x * x)


@njit(cache=True)
def _dpot(x, strength):
    d = 1.0 + x * x
    return -strength * 4.0 * x / (d * d)


@njit(cache=True)
def _hermite(s, h, y0, d0, dd0, y1, d1, dd1):
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s
    h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5
    h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5
    h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5)
    h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5
    h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5
    h5 = 0.5 * (s3 - 2.0 * s4 + s5)
    return h0 * y0 + h * h1 * d0 + h * h * h2 * dd0 + h3 * y1 + h * h4 * d1 + h * h * h5 * dd1


@njit(cache=True)
def integrate(xi, strength, x0, f0, g0, x_out, rtol, atol, h_max, max_steps):
    """Integrate from ``x0`` through the monotone abscissae ``x_out``.

    Returns ``(f, g, status, x_fail, n_steps)`` where ``g = f'``.
    """
    n = x_out.shape[0]
    f_out = np.empty(n, dtype=np.complex128)
    g_out = np.empty(n, dtype=np.complex128)
    if n == 0:
        return f_out, g_out, OK, x0, 0
    direction = 1.0 if x_out[n - 1] >= x0 else -1.0
    x_end = x_out[n - 1]
    k2 = xi * xi

    x = x0
    f = f0
    g = g0
    q = _pot(x, strength) - k2
    # k1 for the state (f, g)
    kf1 = g
    kg1 = q * f

    j = 0
    while j < n and (x_out[j] - x) * direction <= 0.0:
        f_out[j] = f
        g_out[j] = g
        j += 1

    h = direction * min(h_max, 0.1 / (1.0 + xi), abs(x_end - x0) + 1e-300)
    steps = 0
    while j < n:
        if steps >= max_steps:
            return f_out, g_out, MAX_STEPS, x, steps
        if (x + h - x_end) * direction > 0.0:
            h = x_end - x
        if abs(h) <= 1e-14 * max(1.0, abs(x)):
            return f_out, g_out, UNDERFLOW, x, steps

        q2 = _pot(x + _C2 * h, strength) - k2
        f2 = f + h * (_A21 * kf1)
        g2 = g + h * (_A21 * kg1)
        kf2 = g2
        kg2 = q2 * f2

        q3 = _pot(x + _C3 * h, strength) - k2
        f3 = f + h * (_A31 * kf1 + _A32 * kf2)
        g3 = g + h * (_A31 * kg1 + _A32 * kg2)
        kf3 = g3
        kg3 = q3 * f3

        q4 = _pot(x + _C4 * h, strength) - k2
        f4 = f + h * (_A41 * kf1 + _A42 * kf2 + _A43 * kf3)
        g4 = g + h * (_A41 * kg1 + _A42 * kg2 + _A43 * kg3)
        kf4 = g4
        kg4 = q4 * f4

        q5 = _pot(x + _C5 * h, strength) - k2
        f5 = f + h * (_A51 * kf1 + _A52 * kf2 + _A53 * kf3 + _A54 * kf4)
        g5 = g + h * (_A51 * kg1 + _A52 * kg2 + _A53 * kg3 + _A54 * kg4)
        kf5 = g5
        kg5 = q5 * f5

        q6 = _pot(x + h, strength) - k2
        f6 = f + h * (_A61 * kf1 + _A62 * kf2 + _A63 * kf3 + _A64 * kf4 + _A65 * kf5)
        g6 = g + h * (_A61 * kg1 + _A62 * kg2 + _A63 * kg3 + _A64 * kg4 + _A65 * kg5)
        kf6 = g6
        kg6 = q6 * f6

        fn = f + h * (_B1 * kf1 + _B3 * kf3 + _B4 * kf4 + _B5 * kf5 + _B6 * kf6)
        gn = g + h * (_B1 * kg1 + _B3 * kg3 + _B4 * kg4 + _B5 * kg5 + _B6 * kg6)
        kf7 = gn
        kg7 = q6 * fn

        ef = h * (_E1 * kf1 + _E3 * kf3 + _E4 * kf4 + _E5 * kf5 + _E6 * kf6 + _E7 * kf7)
        eg = h * (_E1 * kg1 + _E3 * kg3 + _E4 * kg4 + _E5 * kg5 + _E6 * kg6 + _E7 * kg7)
        sf = atol + rtol * max(abs(f), abs(fn))
        sg = atol + rtol * max(abs(g), abs(gn))
        err = max(abs(ef) / sf, abs(eg) / sg)
        steps += 1

        if err <= 1.0:
            xn = x + h
            # dense output for every requested point inside (x, xn]
            dq0 = _dpot(x, strength)
            dq1 = _dpot(xn, strength)
            q0 = q
            while j < n and (x_out[j] - xn) * direction <= 0.0:
                s = (x_out[j] - x) / h
                f_out[j] = _hermite(s, h, f, g, q0 * f, fn, gn, q6 * fn)
                g_out[j] = _hermite(
                    s, h, g, q0 * f, dq0 * f + q0 * g, gn, q6 * fn, dq1 * fn + q6 * gn
                )
                j += 1
            x = xn
            f = fn
            g = gn
            q = q6
            kf1 = kf7
            kg1 = kg7
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** (-0.2))
        else:
            fac = max(0.2, 0.9 * err ** (-0.2))
        h = direction * min(h_max, abs(h) * fac)
    return f_out, g_out, OK, x, steps
