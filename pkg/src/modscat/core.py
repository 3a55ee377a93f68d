"""Grids, sampled fields, quadrature, finite differences and norms.

Everything else in the package lives on the two grid types defined here:
a symmetric uniform :class:`SpatialGrid` in ``x`` and a :class:`FrequencyGrid`
made of two mirrored uniform half-lines ``±[xi_min, xi_max]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GridError(ValueError):
    """Raised for malformed grids or mismatched grid/field combinations."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on ``[x_min, x_max]`` with ``n`` points.

    Most of the package works on symmetric grids (``x_min == -x_max``);
    half-line grids are allowed for interior problems such as the
    fundamental system near the origin.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise GridError(f"need at least 2 points, got n={self.n}")
        if not self.x_min < self.x_max:
            raise GridError("require x_min < x_max")

    @classmethod
    def symmetric(cls, x_max: float, n: int) -> "SpatialGrid":
        return cls(-float(x_max), float(x_max), int(n))

    @classmethod
    def from_spacing(cls, x_max: float, dx: float) -> "SpatialGrid":
        """Symmetric grid with spacing as close to ``dx`` as an odd point count allows."""
        cells = 2 * int(round(x_max / dx))
        return cls(-float(x_max), float(x_max), cells + 1)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def is_symmetric(self) -> bool:
        return self.x_min == -self.x_max

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n)
        if self.is_symmetric:
            # exact mirror symmetry, so x -> -x maps nodes to nodes bitwise
            x = 0.5 * (x - x[::-1])
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        w = composite_weights(self.n, self.dx)
        w.flags.writeable = False
        return w

    def key(self) -> tuple:
        return ("x", self.x_min, self.x_max, self.n)


@dataclass(frozen=True)
class FrequencyGrid:
    """Two mirrored uniform half-lines ``±xi_k``, ``xi_min <= xi_k <= xi_max``.

    Values are stored in ascending order, so ``values[:m]`` is the negative
    half (reversed) and ``values[m:]`` the positive half.  The band
    ``|xi| < xi_min`` is excluded; spectra are treated as zero there unless the
    two halves tile the line contiguously (``2*xi_min == dxi``), in which case
    the pair ``±xi_min`` are interior nodes of one uniform grid.
    """

    xi_min: float
    xi_max: float
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise GridError(f"need at least 2 points per half-line, got m={self.m}")
        if not (0 < self.xi_min < self.xi_max):
            raise GridError("require 0 < xi_min < xi_max")

    @classmethod
    def contiguous(cls, xi_max: float, m: int) -> "FrequencyGrid":
        """Half-lines offset by half a step so their union is one uniform grid."""
        dxi = xi_max / (m - 0.5)
        return cls(0.5 * dxi, float(xi_max), int(m))

    @property
    def dxi(self) -> float:
        return (self.xi_max - self.xi_min) / (self.m - 1)

    @property
    def is_contiguous(self) -> bool:
        return abs(2 * self.xi_min - self.dxi) <= 1e-9 * self.dxi

    @cached_property
    def positive(self) -> np.ndarray:
        xi = np.linspace(self.xi_min, self.xi_max, self.m)
        xi.flags.writeable = False
        return xi

    @cached_property
    def values(self) -> np.ndarray:
        v = np.concatenate([-self.positive[::-1], self.positive])
        v.flags.writeable = False
        return v

    @cached_property
    def half_weights(self) -> np.ndarray:
        w = np.full(self.m, self.dxi)
        w[-1] *= 0.5
        if not self.is_contiguous:
            w[0] *= 0.5
        w.flags.writeable = False
        return w

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.concatenate([self.half_weights[::-1], self.half_weights])
        w.flags.writeable = False
        return w

    def key(self) -> tuple:
        return ("xi", self.xi_min, self.xi_max, self.m)


def composite_weights(n: int, h: float) -> np.ndarray:
    """Simpson weights for odd ``n``, trapezoid weights for even ``n``."""
    if n < 2:
        raise GridError("quadrature needs at least two nodes")
    if n % 2 == 1:
        w = np.full(n, 2.0)
        w[1:-1:2] = 4.0
        w[0] = w[-1] = 1.0
        return w * (h / 3.0)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _checked(values, n: int) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim != 1 or arr.size != n:
        raise GridError(f"expected {n} samples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GridError("field contains non-finite samples")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function of ``x`` on a :class:`SpatialGrid`."""

    grid: SpatialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked(self.values, self.grid.n))

    @property
    def coords(self) -> np.ndarray:
        return self.grid.x

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "ComplexField":
        return self.with_values(c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex samples of a function of ``xi`` on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _checked(self.values, 2 * self.grid.m))

    @property
    def coords(self) -> np.ndarray:
        return self.grid.values

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def with_values(self, values) -> "SpectralField":
        return SpectralField(self.grid, values)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "SpectralField":
        return self.with_values(c * self.values)

    __rmul__ = __mul__


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridError("fields live on different grids")


def quadrature(f: ComplexField | SpectralField) -> complex:
    """Integral of the sampled function with the grid's composite rule."""
    if f.values.size == 0:
        raise GridError("cannot integrate an empty field")
    return complex(np.dot(f.weights, f.values))


def fd_derivative(values: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Fourth-order finite differences along ``axis``; one-sided at both ends."""
    f = np.moveaxis(np.asarray(values), axis, -1)
    if f.shape[-1] < 5:
        raise GridError("fourth-order stencil needs at least 5 points")
    d = np.empty_like(f)
    d[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / 12
    d[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / 12
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / 12
    d[..., -1] = (25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]) / 12
    d[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / 12
    return np.moveaxis(d / h, -1, axis)


def derivative_x(f: ComplexField) -> ComplexField:
    return f.with_values(fd_derivative(f.values, f.grid.dx))


def fft_derivative_x(f: ComplexField) -> ComplexField:
    """Pseudo-spectral ``d/dx``; accurate for fields that vanish at the grid ends."""
    k = 2 * np.pi * np.fft.fftfreq(f.grid.n, d=f.grid.dx)
    return f.with_values(np.fft.ifft(1j * k * np.fft.fft(f.values)))


def half_line_derivative(values: np.ndarray, grid: FrequencyGrid, axis: int = -1) -> np.ndarray:
    """d/dxi on a spectral array, never differencing across the excluded band."""
    v = np.moveaxis(np.asarray(values), axis, -1)
    m = grid.m
    out = np.empty_like(v)
    out[..., m:] = fd_derivative(v[..., m:], grid.dxi)
    out[..., :m] = fd_derivative(v[..., :m], grid.dxi)
    return np.moveaxis(out, -1, axis)


def derivative_xi(f: SpectralField) -> SpectralField:
    return f.with_values(half_line_derivative(f.values, f.grid))


def norms(f: ComplexField | SpectralField) -> dict:
    """``l2``, ``linf`` and the ``<coord>^2``-weighted L^1 norm."""
    a = np.abs(f.values)
    w = f.weights
    return {
        "l2": float(np.sqrt(np.dot(w, a * a))),
        "linf": float(a.max()) if a.size else 0.0,
        "weighted_l1": float(np.dot(w, (1.0 + f.coords**2) * a)),
    }


def l2_norm(values: np.ndarray, weights: np.ndarray) -> float:
    a = np.abs(values)
    return float(np.sqrt(np.dot(weights, a * a)))
