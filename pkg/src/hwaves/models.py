"""Right-hand sides of the asymptotic h-models and the WW2 transport system.

Second-order models are written ``h_tt = L h + N(h, h_t)`` with the linear
dispersion ``L`` kept apart so the exponential integrator can treat it
exactly.  The ``rhs_*`` functions return only the nonlinear part ``N``.
``build_system`` packages a model as the first-order system
``u_t = A u + N(t, u)`` consumed by :mod:`hwaves.etd`.

Commutators follow ``[a, H] b = a Hb - H(ab)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import GridMismatchError, ParameterError, UnsupportedOperationError
from .etd import BlockDiagonalWaveOperator
from .spectral import (
    PeriodicGrid,
    SpectralField,
    derivative,
    hilbert,
    lambda_pow,
    multiply,
    project_zero_mean,
)

__all__ = [
    "WaveState",
    "WW2State",
    "ModelKind",
    "System",
    "rhs_linear",
    "rhs_quadratic",
    "rhs_quadratic_b",
    "cubic_Q",
    "rhs_cubic",
    "rhs_capillary",
    "rhs_internal_wave",
    "ww2_rhs",
    "build_system",
    "state_to_array",
    "array_to_state",
]


@dataclass(frozen=True, eq=False)
class WaveState:
    """Surface elevation ``h`` and its time derivative ``ht``."""

    h: SpectralField
    ht: SpectralField

    def __post_init__(self):
        if self.h.grid != self.ht.grid:
            raise GridMismatchError("h and ht live on different grids")

    @property
    def grid(self) -> PeriodicGrid:
        return self.h.grid


@dataclass(frozen=True, eq=False)
class WW2State:
    """Elevation ``h`` and tangential velocity variable ``omega``."""

    h: SpectralField
    omega: SpectralField

    def __post_init__(self):
        if self.h.grid != self.omega.grid:
            raise GridMismatchError("h and omega live on different grids")

    @property
    def grid(self) -> PeriodicGrid:
        return self.h.grid


_KINDS = ("linear", "quadratic", "cubic", "capillary", "internal", "ww2")


@dataclass(frozen=True)
class ModelKind:
    """Which model to run, with its surface tension ``lam`` or Atwood number ``atwood``."""

    name: str
    lam: float = 0.0
    atwood: float = -1.0

    def __post_init__(self):
        if self.name not in _KINDS:
            raise ParameterError(f"unknown model {self.name!r}; choose from {', '.join(_KINDS)}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ParameterError(f"surface tension must be >= 0, got {self.lam}")
        if not np.isfinite(self.atwood) or abs(self.atwood) > 1:
            raise ParameterError(f"Atwood number must satisfy |A| <= 1, got {self.atwood}")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def quadratic(cls):
        return cls("quadratic")

    @classmethod
    def cubic(cls):
        return cls("cubic")

    @classmethod
    def capillary(cls, lam: float):
        return cls("capillary", lam=lam)

    @classmethod
    def internal(cls, atwood: float):
        return cls("internal", atwood=atwood)

    @classmethod
    def ww2(cls, lam: float = 0.0):
        return cls("ww2", lam=lam)


def _mul(a, b, dealias):
    return multiply(a, b, dealias=dealias)


def _comm(a, b, dealias):
    # [a, H] b
    return _mul(a, hilbert(b), dealias) - hilbert(_mul(a, b, dealias))


def _unpack(state):
    return state.h, state.ht


def rhs_linear(state: WaveState, g: float = 1.0, dealias: bool = False) -> SpectralField:
    return state.h.grid.zeros(state.h.coeffs.shape[:-1])


def _gravity_part(h, g, dealias):
    # g Lambda(h Lambda h) + g d(h dh)
    return g * (
        lambda_pow(_mul(h, lambda_pow(h), dealias)) + derivative(_mul(h, derivative(h), dealias))
    )


def rhs_quadratic(state: WaveState, g: float = 1.0, dealias: bool = False) -> SpectralField:
    """``-Lambda((H ht)**2) + g Lambda(h Lambda h) + g d(h dh)``."""
    h, ht = _unpack(state)
    Hht = hilbert(ht)
    return -lambda_pow(_mul(Hht, Hht, dealias)) + _gravity_part(h, g, dealias)


def rhs_quadratic_b(state: WaveState, g: float = 1.0, dealias: bool = False) -> SpectralField:
    """Equivalent form ``2 d(ht H ht) - Lambda(ht**2) + g Lambda(h Lambda h) + g d(h dh)``."""
    h, ht = _unpack(state)
    return (
        2.0 * derivative(_mul(ht, hilbert(ht), dealias))
        - lambda_pow(_mul(ht, ht, dealias))
        + _gravity_part(h, g, dealias)
    )


def cubic_Q(h: SpectralField, ht: SpectralField, g: float = 1.0, dealias: bool = False) -> SpectralField:
    """Cubic correction of the h-model, evaluated term by term."""
    if h.grid != ht.grid:
        raise GridMismatchError("h and ht live on different grids")
    m = lambda a, b: _mul(a, b, dealias)  # noqa: E731
    c = lambda a, b: _comm(a, b, dealias)  # noqa: E731
    Hht = hilbert(ht)
    h_ht = m(h, ht)
    inner = (
        c(ht, derivative(m(h, Hht)))
        - c(h, derivative(c(ht, ht)))
        - g * c(h, lambda_pow(m(h, lambda_pow(h))))
        + hilbert(m(h_ht, lambda_pow(ht)))
        - 0.5 * g * c(m(h, h), derivative(h, 2))
        + m(h_ht, derivative(ht))
        - hilbert(m(Hht, lambda_pow(m(h, Hht))))
        - hilbert(m(Hht, m(h, derivative(ht))))
    )
    return -derivative(inner)


def rhs_cubic(state: WaveState, g: float = 1.0, dealias: bool = False) -> SpectralField:
    return rhs_quadratic(state, g, dealias) + cubic_Q(state.h, state.ht, g, dealias)


def rhs_capillary(state: WaveState, g: float = 1.0, lam: float = 0.0, dealias: bool = False) -> SpectralField:
    """Gravity-capillary quadratic model; the linear part ``-g Lambda h - lam Lambda^3 h`` is excluded."""
    if not np.isfinite(lam) or lam < 0:
        raise ParameterError(f"surface tension must be >= 0, got {lam}")
    h, ht = _unpack(state)
    Hht = hilbert(ht)
    out = -lambda_pow(_mul(Hht, Hht, dealias))
    a = g * lambda_pow(h)
    b = -g * derivative(h)
    if lam:
        a = a + lam * lambda_pow(h, 3)
        b = b + lam * derivative(h, 3)
    return out + lambda_pow(_mul(h, a, dealias)) - derivative(_mul(h, b, dealias))


def rhs_internal_wave(state: WaveState, g: float = 1.0, atwood: float = -1.0, dealias: bool = False) -> SpectralField:
    """Two-fluid variant: ``A Lambda((H ht)**2) + A**2 g (Lambda(h Lambda h) + d(h dh))``."""
    if not np.isfinite(atwood) or abs(atwood) > 1:
        raise ParameterError(f"Atwood number must satisfy |A| <= 1, got {atwood}")
    h, ht = _unpack(state)
    Hht = hilbert(ht)
    return atwood * lambda_pow(_mul(Hht, Hht, dealias)) + atwood * _gravity_part(h, atwood * g, dealias)


def ww2_rhs(state: WW2State, g: float = 1.0, lam: float = 0.0, dealias: bool = False):
    """Full right-hand side ``(dh, domega)`` of the WW2 transport system."""
    h, w = state.h, state.omega
    Hw = hilbert(w)
    dh = Hw + derivative(_comm(h, Hw, dealias))
    dw = -g * derivative(h) + lambda_pow(_mul(w, Hw, dealias))
    if lam:
        dw = dw + lam * derivative(h, 3)
    return dh, dw


def _ww2_nonlinear(h, w, dealias):
    Hw = hilbert(w)
    return derivative(_comm(h, Hw, dealias)), lambda_pow(_mul(w, Hw, dealias))


class _Fused:
    """Aliased nonlinearities with products kept in physical space.

    Mathematically identical to the ``rhs_*`` functions with ``dealias=False``
    but with roughly half the transforms; used by :func:`build_system`.
    """

    def __init__(self, grid: PeriodicGrid):
        self.M = grid.M
        k = grid.k.astype(float)
        nyq = k == grid.M // 2
        self.Hs = np.where((k > 0) & ~nyq, -1j, 0.0)
        self.Ls = np.where(nyq, 0.0, k)
        self.Ds = np.where(nyq, 0.0, 1j * k)
        self.D2s = np.where(nyq, 0.0, -(k ** 2))

    def fft(self, p):
        c = np.fft.rfft(p, axis=-1) / self.M
        c[..., -1] = c[..., -1].real
        return c

    def ifft(self, c):
        return np.fft.irfft(c * self.M, n=self.M, axis=-1)

    def quadratic(self, hc, htc, g, cubic=False):
        f, b = self.fft, self.ifft
        Hs, Ls, Ds = self.Hs, self.Ls, self.Ds
        Hht_c = Hs * htc
        h, ht, Hht = b(hc), b(htc), b(Hht_c)
        Lh = b(Ls * hc)
        dh = b(Ds * hc)
        hLh_c = f(h * Lh)
        out = -Ls * f(Hht * Hht) + g * (Ls * hLh_c + Ds * f(h * dh))
        if not cubic:
            return out
        # cubic correction: accumulate the bracket as physical + spectral parts
        Lht = b(Ls * htc)
        dht = b(Ds * htc)
        d2h = b(self.D2s * hc)
        h_ht = h * ht
        P = h_ht * dht  # + h ht d ht
        S = Hs * f(h_ht * Lht)  # + H[(h ht) Lambda ht]
        # [ht, H] d(h H ht)
        X_c = f(h * Hht)
        dX_c = Ds * X_c
        P = P + ht * b(Hs * dX_c)
        S = S - Hs * f(ht * b(dX_c))
        # - [h, H] d([ht, H] ht)
        Y = ht * Hht - b(Hs * f(ht * ht))
        dY_c = Ds * f(Y)
        P = P - h * b(Hs * dY_c)
        S = S + Hs * f(h * b(dY_c))
        # - g [h, H] Lambda(h Lambda h)
        Z_c = Ls * hLh_c
        P = P - g * h * b(Hs * Z_c)
        S = S + g * Hs * f(h * b(Z_c))
        # - (g/2) [h^2, H] d^2 h
        h2 = h * h
        P = P - 0.5 * g * h2 * b(self.Hs * self.D2s * hc)
        S = S + 0.5 * g * Hs * f(h2 * d2h)
        # - H[H ht Lambda(h H ht)] - H[H ht h d ht]
        S = S - Hs * f(Hht * (b(Ls * X_c) + h * dht))
        return out - Ds * (f(P) + S)


def state_to_array(state) -> np.ndarray:
    second = state.omega if isinstance(state, WW2State) else state.ht
    return np.stack([state.h.coeffs, second.coeffs], axis=-2)


def array_to_state(grid: PeriodicGrid, u: np.ndarray, ww2: bool = False):
    h = SpectralField(grid, u[..., 0, :])
    s = SpectralField(grid, u[..., 1, :])
    return WW2State(h, s) if ww2 else WaveState(h, s)


class System(NamedTuple):
    L: BlockDiagonalWaveOperator
    N: Callable


def _second_order_blocks(omega2: np.ndarray) -> np.ndarray:
    n = omega2.shape[0]
    A = np.zeros((n, 2, 2), dtype=complex)
    A[:, 0, 1] = 1.0
    A[:, 1, 0] = -omega2
    # Modes with vanishing restoring force would give a Jordan block; their
    # h <- ht coupling (always including the mean) is moved to N instead.
    A[omega2 == 0, 0, 1] = 0.0
    return A


def build_system(kind: ModelKind, g: float, grid: PeriodicGrid, dealias: bool = False) -> System:
    """First-order system ``u_t = L u + N(t, u)`` for ``u = (h, ht)`` (or ``(h, omega)``).

    Mode-0 and Nyquist blocks are zero.  Any linear coupling that would make a
    block defective (the mean of ``ht`` always, plus every mode when the
    restoring force vanishes) is carried by ``N``.
    """
    if not np.isfinite(g):
        raise ParameterError(f"gravity must be finite, got {g}")
    k = grid.k.astype(float)
    interior = (k > 0) & (k < grid.M // 2)
    lam = kind.lam

    if kind.name == "ww2":
        sym = np.where(interior, g * k + lam * k ** 3, 0.0)
        A = np.zeros((grid.nmodes, 2, 2), dtype=complex)
        A[:, 0, 1] = np.where(interior & (sym != 0), -1j, 0.0)
        A[:, 1, 0] = -1j * sym
        moved = interior & (sym == 0)  # H omega kept in N where defective
        L = BlockDiagonalWaveOperator(A)

        def N(t, u):
            h = SpectralField(grid, u[..., 0, :])
            w = SpectralField(grid, u[..., 1, :])
            nh, nw = _ww2_nonlinear(h, w, dealias)
            out = np.empty_like(u)
            out[..., 0, :] = nh.coeffs + np.where(moved, -1j, 0.0) * w.coeffs
            out[..., 1, :] = nw.coeffs
            return out

        return System(L, N)

    if kind.name == "internal":
        omega2 = -kind.atwood * g * k
    else:
        omega2 = g * k + (lam * k ** 3 if kind.name == "capillary" else 0.0)
    omega2 = np.where(interior, omega2, 0.0)
    A = _second_order_blocks(omega2)
    moved = (A[:, 0, 1] == 0).astype(float)
    L = BlockDiagonalWaveOperator(A)

    fused = _Fused(grid)
    rhs = {
        "linear": None,
        "quadratic": lambda s: rhs_quadratic(s, g, dealias),
        "cubic": lambda s: rhs_cubic(s, g, dealias),
        "capillary": lambda s: rhs_capillary(s, g, lam, dealias),
        "internal": lambda s: rhs_internal_wave(s, g, kind.atwood, dealias),
    }[kind.name]

    def N(t, u):
        out = np.zeros_like(u)
        out[..., 0, :] = moved * u[..., 1, :]
        if kind.name in ("quadratic", "cubic") and not dealias:
            nl = fused.quadratic(u[..., 0, :], u[..., 1, :], g, cubic=kind.name == "cubic")
            nl[..., 0] = 0.0
            out[..., 1, :] = nl
        elif rhs is not None:
            s = WaveState(SpectralField(grid, u[..., 0, :]), SpectralField(grid, u[..., 1, :]))
            out[..., 1, :] = project_zero_mean(rhs(s)).coeffs
        return out

    return System(L, N)


def model_rhs(kind: ModelKind, state, g: float = 1.0, dealias: bool = False):
    """Nonlinear part of ``kind`` at ``state`` (WW2 returns the full pair)."""
    if kind.name == "ww2":
        if not isinstance(state, WW2State):
            raise UnsupportedOperationError("WW2 needs a WW2State (h, omega)")
        return ww2_rhs(state, g, kind.lam, dealias)
    if isinstance(state, WW2State):
        raise UnsupportedOperationError(f"model {kind.name!r} needs a WaveState (h, ht)")
    return {
        "linear": lambda: rhs_linear(state, g),
        "quadratic": lambda: rhs_quadratic(state, g, dealias),
        "cubic": lambda: rhs_cubic(state, g, dealias),
        "capillary": lambda: rhs_capillary(state, g, kind.lam, dealias),
        "internal": lambda: rhs_internal_wave(state, g, kind.atwood, dealias),
    }[kind.name]()
