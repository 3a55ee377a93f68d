"""Distorted Fourier transform of ``L`` as a dense matrix action.

The generalized eigenfunctions are

    e(x, xi) = T(xi) f_+(x, xi) / sqrt(2 pi)     (xi > 0),
    e(x, xi) = e(-x, -xi)                       (xi < 0),

and the transform pair is ``f~(xi) = int f(x) conj(e(x, xi)) dx`` and
``f(x) = int e(x, xi) f~(xi) dxi``.  Only the ``xi > 0`` half of the matrix is
stored; the other half is the same matrix read with ``x`` reversed, which the
transforms exploit by stacking two right-hand sides into a single product.
"""
from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    ComplexField,
    FrequencyGrid,
    GridError,
    SpatialGrid,
    SpectralField,
    derivative_x,
    derivative_xi,
    l2_norm,
    norms,
)
from .jost import (
    TOL_ODE,
    JostSolution,
    coeffs_from_origin,
    default_x0,
    integrate_jost_plus,
    jost_minus,
    ode_defect,
)

log = logging.getLogger(__name__)

SQRT2PI = np.sqrt(2 * np.pi)
_CACHE_VERSION = 1


class BasisError(RuntimeError):
    """Basis construction failed at some wave number."""

    def __init__(self, xi: float, cause: Exception):
        super().__init__(f"basis column at xi={xi:.17g} failed: {cause}")
        self.xi = xi


@dataclass(frozen=True, eq=False)
class DistortedBasis:
    """Columns ``e(x_j, xi_k)`` for the positive half of the frequency grid.

    Attributes
    ----------
    E : ndarray, shape (n, m)
        ``E[j, k] = e(x_j, xi_k)`` with ``xi_k = fgrid.positive[k]``.
    T, R : ndarray, shape (m,)
        Scattering coefficients per column.
    free : bool
        ``V = 0`` oracle mode, where ``E`` holds plane waves.
    """

    sgrid: SpatialGrid
    fgrid: FrequencyGrid
    E: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    free: bool = False
    orthonormal: bool = False
    gram_defect: float = float("nan")

    def __post_init__(self):
        if not self.sgrid.is_symmetric:
            raise GridError("the distorted basis needs a symmetric spatial grid")
        if self.E.shape != (self.sgrid.n, self.fgrid.m):
            raise GridError("basis matrix does not match its grids")

    @property
    def x_weights(self) -> np.ndarray:
        return self.sgrid.weights

    @property
    def xi_weights(self) -> np.ndarray:
        return self.fgrid.weights

    def column(self, xi_index: int) -> np.ndarray:
        """``e(x, xi_k)`` for an index into ``fgrid.values``."""
        m = self.fgrid.m
        if xi_index >= m:
            return self.E[:, xi_index - m]
        return self.E[::-1, m - 1 - xi_index]

    def full_matrix(self) -> np.ndarray:
        """The ``n x 2m`` matrix over all of ``fgrid.values`` (allocates)."""
        return np.concatenate([self.E[::-1, ::-1], self.E], axis=1)


# --------------------------------------------------------------------------
# construction


def _cache_dir() -> Path | None:
    d = os.environ.get("MODSCAT_CACHE")
    if d == "":
        return None
    return Path(d) if d else Path.home() / ".cache" / "modscat"


def _cache_key(sgrid, fgrid, free, tol) -> str:
    text = repr((_CACHE_VERSION, sgrid.key(), fgrid.key(), bool(free), float(tol)))
    return hashlib.sha256(text.encode()).hexdigest()[:20]


def jost_column(xi: float, sgrid: SpatialGrid, free: bool = False, tol: float = TOL_ODE):
    """``(e(., xi), T, R, JostSolution)`` for one ``xi > 0``."""
    sol = integrate_jost_plus(xi, sgrid, default_x0(xi, sgrid.x_max), free=free, tol=tol)
    j0 = sgrid.n // 2
    sc = coeffs_from_origin(xi, sol.f.values[j0], sol.fprime.values[j0])
    return sc.T * sol.f.values / SQRT2PI, sc.T, sc.R, sol


def build_basis(
    sgrid: SpatialGrid,
    fgrid: FrequencyGrid,
    *,
    free: bool = False,
    tol: float = TOL_ODE,
    cache: bool = True,
) -> DistortedBasis:
    """Assemble the basis column by column.

    In free mode the columns are ``exp(i x xi)/sqrt(2 pi)`` in closed form.
    Otherwise each column integrates ``f_+`` from ``max(x_max, 10/xi)``.
    Potential-mode matrices are cached on disk under ``$MODSCAT_CACHE``
    (default ``~/.cache/modscat``; set it empty to disable).

    Raises
    ------
    BasisError
        Carrying the offending ``xi`` if any column fails.
    """
    if not sgrid.is_symmetric or sgrid.n % 2 == 0:
        raise GridError("basis needs a symmetric grid with an odd point count")
    xi = fgrid.positive
    if free:
        E = np.exp(1j * np.outer(sgrid.x, xi)) / SQRT2PI
        one = np.ones(fgrid.m, complex)
        return DistortedBasis(sgrid, fgrid, E, one, 0 * one, True)

    path = None
    cdir = _cache_dir() if cache else None
    if cdir is not None:
        path = cdir / f"basis-{_cache_key(sgrid, fgrid, free, tol)}.npz"
        if path.exists():
            with np.load(path) as z:
                return DistortedBasis(sgrid, fgrid, z["E"], z["T"], z["R"], False)

    E = np.empty((sgrid.n, fgrid.m), dtype=np.complex128)
    T = np.empty(fgrid.m, dtype=np.complex128)
    R = np.empty(fgrid.m, dtype=np.complex128)
    for k, x in enumerate(xi):
        try:
            E[:, k], T[k], R[k], _ = jost_column(float(x), sgrid, free, tol)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise BasisError(float(x), exc) from exc
    basis = DistortedBasis(sgrid, fgrid, E, T, R, False)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, E=E, T=T, R=R)
        tmp.replace(path)
    return basis


def column_residual(basis: DistortedBasis, k: int) -> float:
    """Eigen-equation defect of positive-half column ``k``.

    The column is re-integrated together with its derivative; the result
    must reproduce the stored samples, and its per-cell ODE defect is
    returned (see :func:`modscat.jost.ode_defect`).
    """
    xi = float(basis.fgrid.positive[k])
    col, T, _, sol = jost_column(xi, basis.sgrid, basis.free)
    scale = max(1.0, float(np.abs(col).max()))
    mismatch = float(np.abs(col - basis.E[:, k]).max()) / scale
    if basis.free:
        mismatch = float(np.abs(basis.E[:, k] - np.exp(1j * xi * basis.sgrid.x) / SQRT2PI).max())
    return max(mismatch, ode_defect(sol))


def gram_matrix(basis: DistortedBasis) -> np.ndarray:
    """Normalized Gram matrix ``S = Wxi^{1/2} E^H Wx E Wxi^{1/2}`` over all ``2m`` columns.

    ``S = I`` exactly when forward followed by inverse is the identity on
    spectra; for the continuum eigenfunctions sampled on a box it holds only
    up to integration error and box truncation.
    """
    E = basis.E
    m = basis.fgrid.m
    Ew = np.sqrt(basis.x_weights)[:, None] * E
    pp = Ew.conj().T @ Ew
    np_ = Ew[::-1].conj().T @ Ew  # <e(-x, xi_k), e(x, xi_l)>
    G = np.empty((2 * m, 2 * m), dtype=np.complex128)
    # column order of fgrid.values: negative half reversed, then positive half
    G[m:, m:] = pp
    G[:m, :m] = pp[::-1, ::-1]
    G[:m, m:] = np_[::-1, :]
    G[m:, :m] = G[:m, m:].conj().T
    sw = np.sqrt(basis.xi_weights)
    return sw[:, None] * G * sw[None, :]


def orthonormalize(basis: DistortedBasis, cache: bool = True) -> DistortedBasis:
    """Symmetric (Lowdin) orthonormalization in the discrete inner products.

    Returns a basis whose transforms satisfy ``forward(inverse(g)) = g`` to
    rounding, so the linear propagator is exactly unitary on its range.
    The change to each column is of the size of ``S - I`` (reported as
    ``gram_defect``); the reflection symmetry ``e(x, -xi) = e(-x, xi)`` is
    preserved because ``S`` commutes with it.  Potential-mode results are
    cached on disk next to the raw basis.
    """
    if basis.orthonormal:
        return basis
    path = None
    cdir = _cache_dir() if cache and not basis.free else None
    if cdir is not None:
        path = cdir / f"orth-{_cache_key(basis.sgrid, basis.fgrid, basis.free, TOL_ODE)}.npz"
        if path.exists():
            with np.load(path) as z:
                return DistortedBasis(
                    basis.sgrid, basis.fgrid, z["E"], basis.T, basis.R, False, True, float(z["defect"])
                )
    S = gram_matrix(basis)
    m = basis.fgrid.m
    defect = float(np.abs(S - np.eye(2 * m)).max())
    lam, V = np.linalg.eigh(S)
    if lam.min() <= 1e-8:
        raise BasisError(float("nan"), ValueError("Gram matrix is numerically singular"))
    sw = np.sqrt(basis.xi_weights)
    C = (sw[:, None] * (V * lam**-0.5) @ V.conj().T) / sw[None, :]
    C = C[:, m:]
    E = basis.E[::-1, ::-1] @ C[:m] + basis.E @ C[m:]
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, E=E, defect=defect)
        tmp.replace(path)
    return DistortedBasis(
        basis.sgrid, basis.fgrid, E, basis.T, basis.R, basis.free, True, defect
    )


# --------------------------------------------------------------------------
# transforms


def _check(obj_grid, basis_grid):
    if obj_grid != basis_grid:
        raise GridError("field and basis live on different grids")


def forward_values(values: np.ndarray, basis: DistortedBasis) -> np.ndarray:
    """Forward transform of raw samples; ``values`` may be ``(n,)`` or ``(n, k)``."""
    v = np.asarray(values, dtype=np.complex128)
    wv = basis.x_weights.reshape((-1,) + (1,) * (v.ndim - 1)) * v
    rhs = np.stack([wv, wv[::-1]], axis=0)  # (2, n, ...)
    # E^H r computed as conj(r^T E) to avoid copying E
    n, m = basis.E.shape
    lhs = np.conj(rhs.reshape(2, n, -1)).transpose(0, 2, 1).reshape(-1, n)
    out = np.conj(lhs @ basis.E).reshape(2, -1, m)
    pos, neg = out[0], out[1]
    spec = np.concatenate([neg[:, ::-1], pos], axis=1)  # (r, 2m)
    spec = np.moveaxis(spec, 0, -1).reshape((2 * basis.fgrid.m,) + v.shape[1:])
    return spec


def inverse_values(values: np.ndarray, basis: DistortedBasis) -> np.ndarray:
    """Inverse transform of raw spectral samples; ``(2m,)`` or ``(2m, k)``."""
    g = np.asarray(values, dtype=np.complex128)
    m = basis.fgrid.m
    wg = basis.xi_weights.reshape((-1,) + (1,) * (g.ndim - 1)) * g
    gp = wg[m:]
    gn = wg[:m][::-1]
    both = np.concatenate([gp.reshape(m, -1), gn.reshape(m, -1)], axis=1)
    prod = basis.E @ both
    r = prod.shape[1] // 2
    out = prod[:, :r] + prod[::-1, r:]
    return out.reshape((basis.sgrid.n,) + g.shape[1:])


def forward(f: ComplexField, basis: DistortedBasis) -> SpectralField:
    """``f~(xi) = int f(x) conj(e(x, xi)) dx``."""
    _check(f.grid, basis.sgrid)
    return SpectralField(basis.fgrid, forward_values(f.values, basis))


def inverse(spec: SpectralField, basis: DistortedBasis) -> ComplexField:
    """``f(x) = int e(x, xi) f~(xi) dxi`` over the retained frequencies."""
    _check(spec.grid, basis.fgrid)
    return ComplexField(basis.sgrid, inverse_values(spec.values, basis))


def plancherel_defect(f: ComplexField, basis: DistortedBasis) -> float:
    """``| ||f~|| - ||f|| | / ||f||``; zero for the zero field."""
    nf = l2_norm(f.values, f.weights)
    if nf == 0:
        return 0.0
    spec = forward(f, basis)
    return abs(l2_norm(spec.values, spec.weights) - nf) / nf


def roundtrip_defect(f: ComplexField, basis: DistortedBasis) -> float:
    """Relative L^2 defect of ``inverse(forward(f))``."""
    nf = l2_norm(f.values, f.weights)
    if nf == 0:
        return 0.0
    back = inverse(forward(f, basis), basis)
    return l2_norm(back.values - f.values, f.weights) / nf


def band_truncation_estimate(spec: SpectralField, samples: int = 5) -> float:
    """L^2 mass estimate of the excluded band ``|xi| < xi_min``.

    Uses the quadratic vanishing ``|f~(xi)| <= C xi^2`` with ``C`` read off
    the first ``samples`` nodes of each half-line.
    """
    g = spec.grid
    m = g.m
    xi = g.positive[:samples]
    c_pos = np.max(np.abs(spec.values[m : m + samples]) / xi**2)
    c_neg = np.max(np.abs(spec.values[m - samples : m][::-1]) / xi**2)
    c = max(c_pos, c_neg)
    return float(c * np.sqrt(2 / 5) * g.xi_min**2.5)


# --------------------------------------------------------------------------
# a/b split


def smoothstep_chi(u):
    """Smooth step: 0 for ``u <= 1/2``, 1 for ``u >= 1``, quintic smoothstep between."""
    s = np.clip(2 * np.asarray(u, dtype=float) - 1, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s * s)


CHI_SPEC = "quintic smoothstep u^3(10-15u+6u^2) rescaled to [1/2, 1]"


@dataclass(frozen=True, eq=False)
class ABSplit:
    """``e(x, xi) = e^{i x xi} a(x, xi) + e^{-i x xi} b(x, xi)`` at one ``xi > 0``."""

    xi: float
    a: ComplexField
    b: ComplexField
    chi_spec: str
    defect: float


class ConsistencyError(RuntimeError):
    """An identity that must hold up to integration error was violated."""


def split_ab(xi: float, basis: DistortedBasis, *, threshold: float = 1e-8) -> ABSplit:
    """Split the eigenfunction at ``xi > 0`` into its two oscillatory parts.

    ``a = (2pi)^{-1/2} e^{-ix xi} [(1-chi(-x xi)) T f_+(x, xi) + chi(-x xi) f_-(x, -xi)]``,
    ``b = (2pi)^{-1/2} e^{ix xi} chi(-x xi) R f_-(x, xi)``.

    Raises
    ------
    ConsistencyError
        If ``e^{ix xi} a + e^{-ix xi} b`` differs from ``e`` by more than
        ``threshold`` relative to ``max |e|``.
    """
    if xi <= 0:
        raise ValueError("split_ab is defined for xi > 0")
    sgrid = basis.sgrid
    _, T, R, sol = jost_column(xi, sgrid, basis.free)
    x = sgrid.x
    fp = sol.f.values
    fm = jost_minus(sol).f.values  # f_-(x, xi)
    fm_neg = np.conj(fm)  # f_-(x, -xi)
    chi = smoothstep_chi(-x * xi)
    ph = np.exp(1j * x * xi)
    a = ((1 - chi) * T * fp + chi * fm_neg) / (ph * SQRT2PI)
    b = ph * chi * R * fm / SQRT2PI
    e = T * fp / SQRT2PI
    defect = float(np.abs(ph * a + b / ph - e).max() / max(np.abs(e).max(), 1e-300))
    if defect > threshold:
        raise ConsistencyError(f"a/b reconstruction defect {defect:.3g} at xi={xi}")
    return ABSplit(float(xi), ComplexField(sgrid, a), ComplexField(sgrid, b), CHI_SPEC, defect)


# --------------------------------------------------------------------------
# derivative bounds


def deriv_norm_checks(f: ComplexField, basis: DistortedBasis) -> dict:
    """Ratios comparing physical-side weights and derivatives with spectral ones.

    Returns a dict with

    ``spec_deriv_vs_weight``  ``||f~'|| / ||<x> f||``
    ``deriv_vs_spec_weight``  ``||f'|| / ||xi f~||``
    ``weight_vs_spec_deriv``  ``||x f|| / ||f~'||``
    ``spec_weight_vs_deriv``  ``||xi f~|| / (||f'|| + ||<x>^{-1} f||)``
    """
    x = f.grid.x
    spec = forward(f, basis)
    xi = basis.fgrid.values
    dspec = derivative_xi(spec)
    df = derivative_x(f)
    w, v = f.weights, spec.weights
    n_dspec = l2_norm(dspec.values, v)
    n_xf = l2_norm(x * f.values, w)
    n_jxf = l2_norm(np.sqrt(1 + x**2) * f.values, w)
    n_df = l2_norm(df.values, w)
    n_xispec = l2_norm(xi * spec.values, v)
    n_inv = l2_norm(f.values / np.sqrt(1 + x**2), w)
    return {
        "spec_deriv_vs_weight": n_dspec / n_jxf,
        "deriv_vs_spec_weight": n_df / n_xispec,
        "weight_vs_spec_deriv": n_xf / n_dspec,
        "spec_weight_vs_deriv": n_xispec / (n_df + n_inv),
        "l2": norms(f)["l2"],
    }
