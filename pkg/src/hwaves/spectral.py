"""Periodic grids, real Fourier transforms and the Fourier-multiplier calculus.

A :class:`SpectralField` stores the coefficients ``c_k`` for ``k = 0..M/2`` of a
real 2*pi-periodic function sampled on ``M`` uniformly spaced points, using
the scaling ``c_k = (1/M) sum_j u_j exp(-2 pi i j k / M)`` so that ``c_k`` is
the Fourier coefficient of the function itself.  Negative modes are implied
by ``c_{-k} = conj(c_k)``.

Coefficient arrays may carry leading batch dimensions; every operator acts
on the last axis only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionError,
    GridMismatchError,
    InvalidDataError,
    ParameterError,
    UnsupportedOperationError,
)

__all__ = [
    "PeriodicGrid",
    "SpectralField",
    "transform",
    "inverse",
    "hilbert",
    "lambda_pow",
    "derivative",
    "project_zero_mean",
    "mean",
    "multiply",
    "houli_filter",
    "houli_symbol",
    "xtau_norm",
    "commutator",
    "inner_physical",
    "inner_spectral",
    "l2_norm",
]

HOULI_ORDER = 36
HOULI_STRENGTH = 36.0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid ``x_j = 2 pi j / M`` on ``[0, 2 pi)`` with ``M`` even."""

    M: int

    def __post_init__(self):
        if isinstance(self.M, bool) or int(self.M) != self.M:
            raise ParameterError(f"grid size must be an integer, got {self.M!r}")
        if self.M < 4 or self.M % 2:
            raise ParameterError(f"grid size must be even and >= 4, got {self.M}")
        object.__setattr__(self, "M", int(self.M))

    @property
    def nmodes(self) -> int:
        return self.M // 2 + 1

    @cached_property
    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @cached_property
    def k(self) -> np.ndarray:
        """Nonnegative wavenumbers ``0..M/2`` as floats."""
        return np.arange(self.nmodes, dtype=float)

    @cached_property
    def interior(self) -> np.ndarray:
        """Mask of retained modes: everything but the Nyquist mode."""
        mask = np.ones(self.nmodes, dtype=bool)
        mask[-1] = False
        return mask

    def zeros(self, batch=()) -> "SpectralField":
        return SpectralField(self, np.zeros(tuple(batch) + (self.nmodes,), dtype=complex))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Hermitian half-spectrum of a real periodic function (possibly batched)."""

    grid: PeriodicGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape[-1:] != (self.grid.nmodes,):
            raise DimensionError(
                f"expected {self.grid.nmodes} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, grid: PeriodicGrid, values) -> "SpectralField":
        return transform(grid, values)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func) -> "SpectralField":
        return transform(grid, func(grid.x))

    @property
    def values(self) -> np.ndarray:
        return inverse(self)

    def _check(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grids differ: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check(other)
            return SpectralField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return multiply(self, scalar)
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SpectralField(self.grid, self.coeffs / scalar)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())


def transform(grid: PeriodicGrid, values) -> SpectralField:
    """Physical samples (last axis of length M) to a :class:`SpectralField`."""
    u = np.asarray(values, dtype=float)
    if u.shape[-1:] != (grid.M,):
        raise DimensionError(f"expected {grid.M} samples, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InvalidDataError("input contains NaN or Inf")
    c = np.fft.rfft(u, axis=-1) / grid.M
    c[..., 0] = c[..., 0].real
    c[..., -1] = c[..., -1].real
    return SpectralField(grid, c)


def inverse(f: SpectralField) -> np.ndarray:
    """Samples of ``f`` on its grid."""
    return np.fft.irfft(f.coeffs * f.grid.M, n=f.grid.M, axis=-1)


def _same_grid(*fields: SpectralField) -> PeriodicGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grids differ: {grid} vs {f.grid}")
    return grid


def _apply(f: SpectralField, symbol: np.ndarray) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * symbol)


def _hilbert_symbol(grid: PeriodicGrid) -> np.ndarray:
    s = -1j * np.ones(grid.nmodes)
    s[0] = 0.0
    s[-1] = 0.0
    return s


def hilbert(f: SpectralField) -> SpectralField:
    """Hilbert transform, symbol ``-i sgn(k)``; constants and Nyquist map to 0."""
    return _apply(f, _hilbert_symbol(f.grid))


def lambda_pow(f: SpectralField, s: float = 1.0) -> SpectralField:
    """``Lambda**s``, symbol ``|k|**s`` (``s >= 0``); Nyquist mode mapped to 0."""
    if not np.isfinite(s) or s < 0:
        raise UnsupportedOperationError(f"Lambda**s needs finite s >= 0, got {s}")
    k = f.grid.k
    sym = np.where(k > 0, k ** s, 1.0 if s == 0 else 0.0).astype(complex)
    sym[-1] = 0.0
    return _apply(f, sym)


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """``order``-th derivative, symbol ``(ik)**order``; Nyquist mode mapped to 0."""
    if order < 0 or int(order) != order:
        raise ParameterError(f"derivative order must be a nonnegative integer, got {order}")
    sym = (1j * f.grid.k) ** int(order)
    sym = sym.astype(complex)
    if order > 0:
        sym[-1] = 0.0
    return _apply(f, sym)


def project_zero_mean(f: SpectralField) -> SpectralField:
    c = f.coeffs.copy()
    c[..., 0] = 0.0
    return SpectralField(f.grid, c)


def mean(f: SpectralField):
    """Mean value over one period (the ``k = 0`` coefficient)."""
    m = f.coeffs[..., 0].real
    return float(m) if np.ndim(m) == 0 else m


def multiply(f: SpectralField, g: SpectralField, dealias: bool = False) -> SpectralField:
    """Pointwise product.

    With ``dealias=False`` the product is formed at the M collocation points
    (exact there, aliased in spectral space).  With ``dealias=True`` both
    factors are zero-padded to a 3M/2 grid first, so every retained mode of
    the product is free of aliasing.
    """
    grid = _same_grid(f, g)
    if not dealias:
        return transform(grid, inverse(f) * inverse(g))
    M = grid.M
    Mp = 3 * M // 2
    npad = Mp // 2 + 1

    def pad(c):
        out = np.zeros(c.shape[:-1] + (npad,), dtype=complex)
        out[..., : grid.nmodes] = c
        # split the Nyquist mode between +-M/2 so the padded field is real
        out[..., grid.nmodes - 1] *= 0.5
        return np.fft.irfft(out * Mp, n=Mp, axis=-1)

    prod = pad(f.coeffs) * pad(g.coeffs)
    c = np.fft.rfft(prod, axis=-1)[..., : grid.nmodes] / Mp
    c[..., 0] = c[..., 0].real
    c[..., -1] = 2.0 * c[..., -1].real
    return SpectralField(grid, c)


def houli_symbol(grid: PeriodicGrid) -> np.ndarray:
    """Filter multipliers ``exp(-36 (2|k|/M)**36)``."""
    return np.exp(-HOULI_STRENGTH * (2.0 * grid.k / grid.M) ** HOULI_ORDER)


def houli_filter(f: SpectralField) -> SpectralField:
    return _apply(f, houli_symbol(f.grid))


def _mode_weights(grid: PeriodicGrid) -> np.ndarray:
    # each half-spectrum entry stands for the modes +k and -k, except 0 and M/2
    w = np.full(grid.nmodes, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def xtau_norm(f: SpectralField, tau: float):
    """Exponentially weighted Wiener norm ``sum_m exp(tau |m|) |f_m|``."""
    if not np.isfinite(tau) or tau < 0:
        raise ParameterError(f"tau must be finite and >= 0, got {tau}")
    w = _mode_weights(f.grid) * np.exp(tau * f.grid.k)
    out = np.sum(w * np.abs(f.coeffs), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def commutator(a: SpectralField, b: SpectralField) -> SpectralField:
    """``[a, H] b = a H b - H(a b)``."""
    return multiply(a, hilbert(b)) - hilbert(multiply(a, b))


def inner_physical(f: SpectralField, g: SpectralField) -> float:
    """``(1/M) sum_j f_j g_j``."""
    _same_grid(f, g)
    return float(np.mean(inverse(f) * inverse(g), axis=-1))


def inner_spectral(f: SpectralField, g: SpectralField) -> float:
    """Real inner product on the half spectrum, isometric to :func:`inner_physical`."""
    _same_grid(f, g)
    w = _mode_weights(f.grid)
    return float(np.sum(w * np.real(np.conj(f.coeffs) * g.coeffs), axis=-1))


def l2_norm(f: SpectralField):
    """``||f||_{L^2(0, 2 pi)}`` evaluated by Parseval."""
    w = _mode_weights(f.grid)
    out = np.sqrt(2.0 * np.pi * np.sum(w * np.abs(f.coeffs) ** 2, axis=-1))
    return float(out) if np.ndim(out) == 0 else out
