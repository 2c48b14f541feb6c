"""Stokes expansion of the h-models and the Catalan majorant.

Writing ``h = sum_k eps^{k+1} h_k`` turns the quadratic (or cubic) h-model
into a triangular cascade of forced linear oscillators, one per Fourier mode:

    d^2/dt^2 h_k(l) + g |l| h_k(l) = f_k(l, t),

with ``f_k`` built from the lower orders.  Order 0 is solved in closed form;
the higher orders are integrated jointly with classical RK4 on a uniform time
grid, with order 0 evaluated exactly at every stage time.  The slices do not
depend on ``eps``; it only enters when the series is summed.

Coefficients are stored two-sided: index ``B + l`` holds mode ``l`` for
``-B <= l <= B`` with ``B = (K + 1) D`` for initial bandwidth ``D`` and
highest order ``K``.  Products are exact direct convolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidDataError, ParameterError, StateError
from .spectral import PeriodicGrid, SpectralField

__all__ = [
    "SeriesSolution",
    "MajorantSequence",
    "catalan",
    "solve_order0",
    "BandOperators",
    "quadratic_forcing",
    "cubic_forcing",
    "recurse_quadratic",
    "recurse_cubic",
    "sum_series",
    "majorant_check",
]

_MAX_CATALAN = 30


def catalan(k: int) -> int:
    """Catalan number ``C_k`` from ``C_k = sum_{j<k} C_j C_{k-1-j}``, ``C_0 = 1``."""
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ParameterError(f"Catalan index must be a nonnegative integer, got {k!r}")
    if k > _MAX_CATALAN:
        raise ParameterError(f"Catalan numbers are supported up to k = {_MAX_CATALAN}")
    c = [1]
    for n in range(1, int(k) + 1):
        c.append(sum(c[j] * c[n - 1 - j] for j in range(n)))
    return c[int(k)]


@dataclass
class SeriesSolution:
    """Slices ``h_k`` and ``d_t h_k`` on a shared time grid.

    ``h[k]`` and ``ht[k]`` have shape ``(len(times), 2 B + 1)``.
    """

    epsilon: float
    g: float
    D: int
    B: int
    times: np.ndarray
    h: list = field(default_factory=list)
    ht: list = field(default_factory=list)
    kind: str = "quadratic"
    # order-0 initial data, kept for exact evaluation at RK stage times
    h0_init: np.ndarray = field(default=None, repr=False)
    ht0_init: np.ndarray = field(default=None, repr=False)

    @property
    def ell(self) -> np.ndarray:
        return np.arange(-self.B, self.B + 1)

    @property
    def orders(self) -> int:
        return len(self.h) - 1

    def order0_at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Exact order-0 slice and its time derivative at times ``t`` (any shape)."""
        t = np.asarray(t, dtype=float)[..., None]
        w = np.sqrt(self.g * np.abs(self.ell))
        safe = np.where(w > 0, w, 1.0)
        c, s = np.cos(w * t), np.sin(w * t)
        a, b = self.h0_init, self.ht0_init
        h = a * c + np.where(w > 0, b / safe, 0.0) * s
        ht = -a * w * s + b * c
        return h, ht

    def field(self, k: int, n: int, grid: PeriodicGrid, derivative: bool = False) -> SpectralField:
        """Slice ``k`` at time index ``n`` as a :class:`SpectralField` on ``grid``."""
        if k > self.orders:
            raise StateError(f"order {k} has not been computed")
        arr = (self.ht if derivative else self.h)[k][n]
        return _to_field(arr, self.B, grid)


@dataclass
class MajorantSequence:
    R: int
    D: int
    C0: float
    values: np.ndarray  # (R + 1, len(times))
    bounds: np.ndarray  # Catalan bound with C0, same shape
    smallest_constant: np.ndarray  # per order
    passed_by_order: np.ndarray
    times: np.ndarray

    @property
    def uniform_constant(self) -> float:
        """Smallest single constant for which the bound holds at every order."""
        return float(self.smallest_constant.max())

    @property
    def passed(self) -> bool:
        return bool(np.all(self.passed_by_order))


def _to_field(arr: np.ndarray, B: int, grid: PeriodicGrid) -> SpectralField:
    if B > grid.M // 2 - 1:
        raise ParameterError(f"grid M={grid.M} cannot hold bandwidth {B}")
    c = np.zeros(arr.shape[:-1] + (grid.nmodes,), dtype=complex)
    c[..., : B + 1] = arr[..., B:]
    return SpectralField(grid, c)


def _from_field(f: SpectralField, B: int) -> np.ndarray:
    c = f.coeffs
    nm = f.grid.nmodes
    out = np.zeros(c.shape[:-1] + (2 * B + 1,), dtype=complex)
    top = min(B, nm - 2)
    out[..., B : B + top + 1] = c[..., : top + 1]
    out[..., B - top : B] = np.conj(c[..., 1 : top + 1][..., ::-1])
    return out


def _bandwidth(f: SpectralField, tol: float = 1e-14) -> int:
    mag = np.abs(f.coeffs)
    big = np.nonzero(mag > tol * max(mag.max(), 1e-300))[0]
    return int(big.max()) if big.size else 0


class BandOperators:
    """Fourier multipliers and exact products on two-sided arrays of half-width ``B``."""

    def __init__(self, B: int, g: float):
        self.B = B
        self.g = g
        ell = np.arange(-B, B + 1).astype(float)
        self.H = -1j * np.sign(ell)
        self.L = np.abs(ell)
        self.Dx = 1j * ell

    def conv(self, a, b):
        shape = np.broadcast_shapes(a.shape, b.shape)
        a = np.broadcast_to(a, shape).reshape(-1, shape[-1])
        b = np.broadcast_to(b, shape).reshape(-1, shape[-1])
        return kernels.conv_direct(a, b, self.B).reshape(shape)

    def comm(self, a, b):
        # [a, H] b
        return self.conv(a, self.H * b) - self.H * self.conv(a, b)


def quadratic_forcing(ops: BandOperators, h, ht, k: int, reading: str = "derivative") -> np.ndarray:
    """Order-``k`` quadratic forcing from slices ``h[j]``, ``ht[j]`` (``j < k``).

    ``reading="derivative"`` uses the multiplier ``(i l)(i m)`` for the
    ``g d(h_j d h_{k-1-j})`` term; ``"alternative"`` uses ``(i(l - m))(i m)``,
    i.e. ``g (d h_j)(d h_{k-1-j})``, which is a different operator.
    """
    if reading not in ("derivative", "alternative"):
        raise ParameterError(f"unknown forcing reading {reading!r}")
    if k < 1:
        raise ParameterError("forcing is defined for k >= 1")
    j = np.arange(k)
    a_h, b_h = h[j], h[k - 1 - j]
    a_t, b_t = ht[j], ht[k - 1 - j]
    g = ops.g
    f = -ops.L * ops.conv(ops.H * a_t, ops.H * b_t)
    f = f + g * ops.L * ops.conv(a_h, ops.L * b_h)
    if reading == "derivative":
        f = f + g * ops.Dx * ops.conv(a_h, ops.Dx * b_h)
    else:
        f = f + g * ops.conv(ops.Dx * a_h, ops.Dx * b_h)
    return f.sum(axis=0)


def _trilinear_Q(ops: BandOperators, a, at, b, bt, c, ct) -> np.ndarray:
    """Cubic term with ``(h_r, h_{j-r}, h_{k-2-j}) -> (a, b, c)`` in its fixed positions."""
    g = ops.g
    H, L, Dx = ops.H, ops.L, ops.Dx
    m, cm = ops.conv, ops.comm
    inner = (
        cm(at, Dx * m(b, H * ct))
        - cm(a, Dx * cm(bt, ct))
        - g * cm(a, L * m(b, L * c))
        + H * m(m(a, bt), L * ct)
        - 0.5 * g * cm(m(a, b), Dx * Dx * c)
        + m(m(a, bt), Dx * ct)
        - H * m(H * at, L * m(b, H * ct))
        - H * m(H * at, m(b, Dx * ct))
    )
    return -Dx * inner


def cubic_forcing(ops: BandOperators, h, ht, k: int) -> np.ndarray:
    """``sum_{j <= k-2} sum_{r <= j} Q(h_r, h_{j-r}, h_{k-2-j})`` (zero for ``k < 2``)."""
    if k < 2:
        return np.zeros(h.shape[-1], dtype=complex)
    idx = [(r, j - r, k - 2 - j) for j in range(k - 1) for r in range(j + 1)]
    r, s, q = (np.array(v) for v in zip(*idx))
    return _trilinear_Q(ops, h[r], ht[r], h[s], ht[s], h[q], ht[q]).sum(axis=0)


def solve_order0(
    h_init: SpectralField,
    ht_init: SpectralField | None = None,
    g: float = 1.0,
    t_final: float = 0.5,
    n_steps: int = 1000,
    K: int = 6,
    epsilon: float = 1.0,
    D: int | None = None,
) -> SeriesSolution:
    """Order-0 slice ``h_0 = h_init / eps`` on the grid ``t_n = n t_final / n_steps``.

    ``h_init`` and ``ht_init`` are the physical initial data; ``K`` fixes the
    bandwidth reserved for the higher orders.
    """
    if not np.isfinite(g) or g <= 0:
        raise ParameterError(f"gravity must be positive, got {g}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ParameterError(f"number of steps must be a positive integer, got {n_steps}")
    if not np.isfinite(epsilon) or epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if int(K) != K or K < 0:
        raise ParameterError(f"highest order must be a nonnegative integer, got {K}")
    if ht_init is None:
        ht_init = h_init.grid.zeros()
    if abs(h_init.coeffs[..., 0]) > 1e-14 * max(1.0, np.abs(h_init.coeffs).max()):
        raise InvalidDataError("initial elevation must have zero mean")
    if abs(ht_init.coeffs[..., 0]) > 1e-14 * max(1.0, np.abs(ht_init.coeffs).max()):
        raise InvalidDataError("initial velocity must have zero mean")
    if D is None:
        D = max(_bandwidth(h_init), _bandwidth(ht_init), 1)
    B = (int(K) + 1) * int(D)
    times = np.linspace(0.0, float(t_final), int(n_steps) + 1)
    sol = SeriesSolution(float(epsilon), float(g), int(D), B, times)
    sol.h0_init = _from_field(h_init, B) / epsilon
    sol.ht0_init = _from_field(ht_init, B) / epsilon
    # drop anything beyond the declared initial bandwidth
    # and the (roundoff-level) mean, which the cascade keeps at zero
    far = (np.abs(sol.ell) > D) | (sol.ell == 0)
    sol.h0_init[far] = 0.0
    sol.ht0_init[far] = 0.0
    h0, ht0 = sol.order0_at(times)
    sol.h = [h0]
    sol.ht = [ht0]
    sol.kind = "quadratic"
    sol._K = int(K)
    return sol


def _integrate(sol: SeriesSolution, K: int, cubic: bool):
    if K > getattr(sol, "_K", K):
        raise ParameterError(f"bandwidth was reserved for orders <= {sol._K}, asked for {K}")
    if K < 1:
        sol.h, sol.ht = sol.h[:1], sol.ht[:1]
        return
    ops = BandOperators(sol.B, sol.g)
    w2 = sol.g * ops.L
    n = 2 * sol.B + 1
    times = sol.times
    dt = times[1] - times[0]

    def rhs(t, y):
        # y: (2, K, n) for orders 1..K
        h0, ht0 = sol.order0_at(t)
        h = np.concatenate([h0[None], y[0]])
        ht = np.concatenate([ht0[None], y[1]])
        dy = np.empty_like(y)
        dy[0] = y[1]
        for k in range(1, K + 1):
            f = quadratic_forcing(ops, h, ht, k)
            if cubic:
                f = f + cubic_forcing(ops, h, ht, k)
            f[sol.B] = 0.0
            dy[1, k - 1] = -w2 * y[0, k - 1] + f
        return dy

    y = np.zeros((2, K, n), dtype=complex)
    H = np.zeros((K, len(times), n), dtype=complex)
    Ht = np.zeros_like(H)
    for i in range(1, len(times)):
        t = times[i - 1]
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        H[:, i] = y[0]
        Ht[:, i] = y[1]
    sol.h = sol.h[:1] + [H[k] for k in range(K)]
    sol.ht = sol.ht[:1] + [Ht[k] for k in range(K)]
    sol.kind = "cubic" if cubic else "quadratic"


def recurse_quadratic(sol: SeriesSolution, k: int) -> np.ndarray:
    """Compute orders ``1..k`` of the quadratic cascade; returns the order-``k`` slice."""
    if not sol.h:
        raise StateError("order 0 has not been computed")
    if int(k) != k or k < 0:
        raise ParameterError(f"order must be a nonnegative integer, got {k}")
    _integrate(sol, int(k), cubic=False)
    return sol.h[int(k)]


def recurse_cubic(sol: SeriesSolution, k: int) -> np.ndarray:
    """As :func:`recurse_quadratic` with the cubic trilinear forcing included."""
    if not sol.h:
        raise StateError("order 0 has not been computed")
    if int(k) != k or k < 0:
        raise ParameterError(f"order must be a nonnegative integer, got {k}")
    _integrate(sol, int(k), cubic=True)
    return sol.h[int(k)]


def _l2(arr: np.ndarray) -> np.ndarray:
    return np.sqrt(2.0 * np.pi * np.sum(np.abs(arr) ** 2, axis=-1))


def sum_series(sol: SeriesSolution, K_max: int, grid: PeriodicGrid, epsilon: float | None = None):
    """Partial sums ``sum_{k <= K_max} eps^{k+1} h_k`` at every grid time.

    Returns ``(h, ht, tail)``: batched :class:`SpectralField` objects of shape
    ``(len(times), M/2 + 1)`` and a per-time tail estimate
    ``eps^{K_max+2} |h_{K_max}| rho / (1 - eps rho)`` where ``rho`` is the
    ratio of the last two slice norms (infinite if the ratio test fails).
    """
    if K_max > sol.orders:
        raise StateError(f"orders up to {K_max} requested, only {sol.orders} computed")
    eps = sol.epsilon if epsilon is None else float(epsilon)
    tot = sum(eps ** (k + 1) * sol.h[k] for k in range(K_max + 1))
    tot_t = sum(eps ** (k + 1) * sol.ht[k] for k in range(K_max + 1))
    if K_max >= 1:
        last = _l2(sol.h[K_max])
        prev = _l2(sol.h[K_max - 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(prev > 0, last / prev, 0.0)
            tail = np.where(
                eps * rho < 1, eps ** (K_max + 1) * last * eps * rho / (1 - eps * rho), np.inf
            )
    else:
        tail = np.full(len(sol.times), np.inf)
    return _to_field(tot, sol.B, grid), _to_field(tot_t, sol.B, grid), tail


def _xtau_two_sided(arr: np.ndarray, ell: np.ndarray, tau: float) -> np.ndarray:
    return np.sum(np.exp(tau * np.abs(ell)) * np.abs(arr), axis=-1)


def majorant_check(sol: SeriesSolution, R: int, D: int | None = None, g: float | None = None) -> MajorantSequence:
    """Weighted norms ``A_k(t)`` and the Catalan bound ``A_k <= C_k t^k C0^{k+1}``.

    ``C0`` is the supremum of ``A_0`` over the time grid.  For each order the
    smallest constant ``C`` with ``A_k(t) <= C_k t^k C^{k+1}`` on the grid is
    reported; the check passes when ``C0`` works for every ``k <= R``.
    """
    if int(R) != R or R < 1:
        raise ParameterError(f"R must be a positive integer, got {R}")
    R = int(R)
    D = sol.D if D is None else int(D)
    g = sol.g if g is None else float(g)
    if D * (R + 1) / (1 + R * R) > 1:
        raise ParameterError(f"R = {R} violates D (R + 1) / (1 + R^2) <= 1 for D = {D}")
    if sol.orders < R:
        raise StateError(f"orders up to {R} are needed, only {sol.orders} computed")
    ell = sol.ell
    pref = max(2.0 / math.sqrt(g), 16.0 * g)
    t = sol.times
    A = np.empty((R + 1, len(t)))
    for k in range(R + 1):
        tau = R + 1 - k
        w = math.exp(-(k + 1) * D * (R + 1) / (1 + (R * R if k > 0 else 0)))
        A[k] = pref * w * (_xtau_two_sided(sol.h[k], ell, tau) + _xtau_two_sided(sol.ht[k], ell, tau))
    C0 = float(A[0].max())
    cat = np.array([catalan(k) for k in range(R + 1)], dtype=float)
    bounds = cat[:, None] * t[None, :] ** np.arange(R + 1)[:, None] * C0 ** (np.arange(R + 1)[:, None] + 1)
    smallest = np.zeros(R + 1)
    smallest[0] = C0
    for k in range(1, R + 1):
        pos = t > 0
        ratio = A[k, pos] / (cat[k] * t[pos] ** k)
        smallest[k] = float(np.max(ratio) ** (1.0 / (k + 1))) if ratio.size else 0.0
    ok = np.all(A <= bounds * (1 + 1e-12) + 1e-300, axis=1)
    return MajorantSequence(R, D, C0, A, bounds, smallest, ok, t)
