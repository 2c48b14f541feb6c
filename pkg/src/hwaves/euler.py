"""Free-surface Euler reference solver by a Cauchy-integral boundary method.

The surface is the graph ``zeta(alpha) = alpha + i h(alpha)`` above a fluid
of infinite depth.  The complex potential is represented by a real dipole
density ``mu`` which solves a second-kind Fredholm equation on the surface;
the surface velocity then follows from the boundary limit of the derivative
of the Cauchy integral.  Integrals use the trapezoidal rule on the
collocation grid and derivatives and the Hilbert transform are spectral.

The Dirichlet-Neumann operator is also available as a truncated power
series in ``h`` for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate._ivp import dop853_coefficients as _dop

from . import kernels
from .errors import BlowUpError, GridMismatchError, ParameterError, SolverError
from .spectral import (
    PeriodicGrid,
    SpectralField,
    derivative,
    hilbert,
    houli_symbol,
    lambda_pow,
    transform,
)

__all__ = [
    "SurfaceState",
    "kernel_matrix",
    "solve_mu",
    "surface_velocity",
    "euler_rhs",
    "dno_bim",
    "dno_series",
    "rk8_step",
    "evolve_euler",
    "energy",
]


@dataclass(frozen=True, eq=False)
class SurfaceState:
    """Elevation ``h`` and the velocity potential ``phi`` restricted to the surface."""

    h: SpectralField
    phi: SpectralField

    def __post_init__(self):
        if self.h.grid != self.phi.grid:
            raise GridMismatchError("h and phi live on different grids")
        if not (np.all(np.isfinite(self.h.coeffs)) and np.all(np.isfinite(self.phi.coeffs))):
            raise ParameterError("surface state contains non-finite values")

    @property
    def grid(self) -> PeriodicGrid:
        return self.h.grid


def _geometry(h: SpectralField):
    return h.values, derivative(h).values, derivative(h, 2).values


def kernel_matrix(h: SpectralField) -> np.ndarray:
    """``K[i, j] = K(alpha_i, alpha_j)``, with the analytic limit on the diagonal."""
    return kernels.bim_kernel(*_geometry(h))


def _gmres(A, b, x0, tol, max_iter):
    """Restart-free GMRES for a small dense system, started from ``x0``."""
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - A @ x0
    beta = np.linalg.norm(r)
    if beta <= tol * bnorm:
        return x0, 0, beta / bnorm
    n = b.shape[0]
    m = min(max_iter, n)
    V = np.empty((m + 1, n))
    Hm = np.zeros((m + 1, m))
    cs = np.empty(m)
    sn = np.empty(m)
    e = np.zeros(m + 1)
    e[0] = beta
    V[0] = r / beta
    res = beta
    for j in range(m):
        w = A @ V[j]
        # classical Gram-Schmidt, applied twice
        c1 = V[: j + 1] @ w
        w -= c1 @ V[: j + 1]
        c2 = V[: j + 1] @ w
        w -= c2 @ V[: j + 1]
        Hm[: j + 1, j] = c1 + c2
        hn = np.linalg.norm(w)
        Hm[j + 1, j] = hn
        for i in range(j):
            t = cs[i] * Hm[i, j] + sn[i] * Hm[i + 1, j]
            Hm[i + 1, j] = -sn[i] * Hm[i, j] + cs[i] * Hm[i + 1, j]
            Hm[i, j] = t
        d = np.hypot(Hm[j, j], Hm[j + 1, j])
        cs[j] = Hm[j, j] / d
        sn[j] = Hm[j + 1, j] / d
        Hm[j, j] = d
        Hm[j + 1, j] = 0.0
        e[j + 1] = -sn[j] * e[j]
        e[j] = cs[j] * e[j]
        res = abs(e[j + 1])
        if res <= tol * bnorm or hn == 0.0:
            break
        V[j + 1] = w / hn
    k = j + 1
    y = scipy.linalg.solve_triangular(Hm[:k, :k], e[:k])
    return x0 + y @ V[:k], k, res / bnorm


class BIMSolver:
    """Reusable workspace for the dipole solve and the surface velocity on one grid.

    ``method="direct"`` factors the dense system by LU.  ``method="gmres"``
    runs GMRES to relative residual ``tol`` warm-started from the previous
    density, which is much cheaper when called repeatedly along a trajectory.
    """

    def __init__(self, grid: PeriodicGrid, method: str = "direct", tol: float = 1e-14, max_iter: int = 200):
        if method not in ("direct", "gmres"):
            raise ParameterError(f"unknown solver method {method!r}")
        self.grid = grid
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        M = grid.M
        self._re = np.empty((M, M))  # Re K / M
        self._A = np.empty((M, M))  # Im K / M - I / 2
        self._hx = None
        self._mu = None
        self.iterations = 0

    def set_surface(self, h: SpectralField):
        if h.grid != self.grid:
            raise GridMismatchError("surface lives on a different grid")
        hv, hx, hxx = _geometry(h)
        kernels.bim_kernel_parts(
            hv, hx, hxx, out=(self._re, self._A), scale=1.0 / self.grid.M, im_shift=-0.5
        )
        self._hx = hx

    def solve(self, phi_values: np.ndarray) -> np.ndarray:
        b = np.asarray(phi_values, dtype=float)
        if self.method == "direct":
            mu = _solve(self._A, b)
        else:
            x0 = self._mu if self._mu is not None else -2.0 * b
            mu, its, res = _gmres(self._A, b, x0, self.tol, self.max_iter)
            self.iterations += its
            if not np.all(np.isfinite(mu)) or res > max(self.tol, 1e-12) * 10:
                cond = float(np.linalg.cond(self._A))
                raise SolverError(
                    f"GMRES stalled at relative residual {res:.3e} (condition number {cond:.3e})", cond
                )
        self._mu = mu
        return mu

    def velocity(self, mu: np.ndarray):
        """Surface ``(u, v)`` as physical arrays."""
        grid = self.grid
        mu_f = transform(grid, mu)
        dmu_f = derivative(mu_f)
        dmu = dmu_f.values
        # K^T mu' / M, with Im K^T mu' recovered from the stored system matrix
        kre = dmu @ self._re
        kim = dmu @ self._A + 0.5 * dmu
        w = -0.5 * dmu + 0.5j * hilbert(dmu_f).values + 1j * kre - kim
        Phi_z = w / (1.0 + 1j * self._hx)
        return Phi_z.real, -Phi_z.imag


def _fredholm(K: np.ndarray) -> np.ndarray:
    M = K.shape[0]
    A = K.imag / M
    A[np.diag_indices(M)] -= 0.5
    return A


def _solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        lu = scipy.linalg.lu_factor(A, check_finite=True)
        mu = scipy.linalg.lu_solve(lu, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"dipole system could not be factored: {exc}", np.inf) from exc
    if not np.all(np.isfinite(mu)):
        cond = float(np.linalg.cond(A))
        raise SolverError(f"dipole system is singular (condition number {cond:.3e})", cond)
    return mu


def solve_mu(h: SpectralField, phi: SpectralField, K: np.ndarray | None = None) -> np.ndarray:
    """Dipole density on the grid solving ``-mu/2 + (1/M) Im(K) mu = phi``."""
    if h.grid != phi.grid:
        raise GridMismatchError("h and phi live on different grids")
    if K is None:
        K = kernel_matrix(h)
    return _solve(_fredholm(K), phi.values)


def surface_velocity(h: SpectralField, mu, K: np.ndarray | None = None):
    """Surface values ``(u, v) = (phi_x, phi_y)`` from the dipole density ``mu``.

    Uses ``zeta' Phi_z = -mu'/2 + (i/2) H mu' - (1/(i M)) sum_j K(alpha_j, alpha_i) mu'_j``
    and ``Phi_z = u - i v``.
    """
    grid = h.grid
    if K is None:
        K = kernel_matrix(h)
    mu_f = transform(grid, np.asarray(mu, dtype=float))
    dmu_f = derivative(mu_f)
    dmu = dmu_f.values
    w = -0.5 * dmu + 0.5j * hilbert(dmu_f).values - (K.T @ dmu) / (1j * grid.M)
    hx = derivative(h).values
    Phi_z = w / (1.0 + 1j * hx)
    return transform(grid, Phi_z.real), transform(grid, -Phi_z.imag)


def _velocity(h: SpectralField, phi: SpectralField, solver: BIMSolver | None = None):
    if solver is None:
        solver = BIMSolver(h.grid)
    solver.set_surface(h)
    return solver.velocity(solver.solve(phi.values))


def dno_bim(h: SpectralField, psi: SpectralField, solver: BIMSolver | None = None) -> SpectralField:
    """Dirichlet-Neumann operator ``G(h) psi = phi_y - h_x phi_x`` via the dipole solve."""
    u, v = _velocity(h, psi, solver)
    return transform(h.grid, v - derivative(h).values * u)


def dno_series(h: SpectralField, psi: SpectralField, order: int) -> SpectralField:
    """``sum_{j <= order} G_j(h) psi`` from the power-series recursion.

    ``G_0 = Lambda`` and
    ``G_j = -Lambda^{j-1} d (h^j/j!) d - sum_{i<j} Lambda^{j-i} (h^{j-i}/(j-i)!) G_i``.
    """
    if int(order) != order or order < 0:
        raise ParameterError(f"series order must be a nonnegative integer, got {order}")
    if h.grid != psi.grid:
        raise GridMismatchError("h and psi live on different grids")
    hv = h.values
    grid = h.grid
    dpsi = derivative(psi).values
    terms = [lambda_pow(psi)]
    for j in range(1, int(order) + 1):
        g = -lambda_pow(derivative(transform(grid, hv ** j / math.factorial(j) * dpsi)), j - 1)
        for i in range(j):
            hp = hv ** (j - i) / math.factorial(j - i)
            g = g - lambda_pow(transform(grid, hp * terms[i].values), j - i)
        terms.append(g)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _rhs_values(grid, hv, phiv, g, lam, solver):
    h = transform(grid, hv)
    solver.set_surface(h)
    u, v = solver.velocity(solver.solve(phiv))
    hx = solver._hx
    ht = v - hx * u
    rhs = v * ht - 0.5 * u ** 2 - 0.5 * v ** 2 - g * hv
    if lam:
        rhs = rhs + lam * derivative(transform(grid, hx / np.sqrt(1.0 + hx ** 2))).values
    return ht, rhs - rhs.mean()


def euler_rhs(state: SurfaceState, g: float = 1.0, lam: float = 0.0, solver: BIMSolver | None = None):
    """``(h_t, phi_t)`` for the free-surface Euler equations."""
    grid = state.grid
    if solver is None:
        solver = BIMSolver(grid)
    ht, dphi = _rhs_values(grid, state.h.values, state.phi.values, g, lam, solver)
    dphi = transform(grid, dphi)
    dphi.coeffs[..., 0] = 0.0
    return transform(grid, ht), dphi


# fixed-step Dormand-Prince 8(5,3); tableau taken from SciPy
_NS = _dop.N_STAGES
_A = _dop.A[:_NS, :_NS]
_B = _dop.B
_C = _dop.C[:_NS]


def _pack(state: SurfaceState) -> np.ndarray:
    return np.stack([state.h.values, state.phi.values])


def _unpack(grid, y) -> SurfaceState:
    return SurfaceState(transform(grid, y[0]), transform(grid, y[1]))


def _rk8(grid, y, dt, g, lam, solver):
    ks = np.empty((_NS,) + y.shape)
    for s in range(_NS):
        ys = y + dt * np.tensordot(_A[s, :s], ks[:s], axes=1) if s else y
        ht, dphi = _rhs_values(grid, ys[0], ys[1], g, lam, solver)
        ks[s, 0] = ht
        ks[s, 1] = dphi
    return y + dt * np.tensordot(_B, ks, axes=1)


def rk8_step(
    state: SurfaceState, dt: float, g: float = 1.0, lam: float = 0.0, solver: BIMSolver | None = None
) -> SurfaceState:
    """One explicit eighth-order Dormand-Prince step of size ``dt``."""
    if not np.isfinite(dt) or dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    if solver is None:
        solver = BIMSolver(state.grid)
    return _unpack(state.grid, _rk8(state.grid, _pack(state), dt, g, lam, solver))


def evolve_euler(
    state: SurfaceState,
    t_final: float,
    n_steps: int,
    g: float = 1.0,
    lam: float = 0.0,
    output_steps=None,
    blowup_bound: float = 1e6,
    callback=None,
    method: str = "direct",
    filter: bool = True,
):
    """Uniform-step driver; returns ``(times, [SurfaceState, ...])``.

    ``output_steps`` lists step indices to record (default: the last one).
    ``callback(step, t, state)`` is called after every step when given.
    ``method`` selects the dipole solver (see :class:`BIMSolver`).  With
    ``filter`` the Hou-Li filter is applied to ``h`` and ``phi`` after every
    step; without it high modes grow from roundoff on fine grids.
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise ParameterError(f"number of steps must be a positive integer, got {n_steps}")
    if not np.isfinite(t_final) or t_final <= 0:
        raise ParameterError(f"final time must be positive, got {t_final}")
    n_steps = int(n_steps)
    dt = t_final / n_steps
    wanted = {n_steps} if output_steps is None else set(int(s) for s in output_steps)
    grid = state.grid
    solver = BIMSolver(grid, method=method)
    y = _pack(state)
    times, out = [], []
    if 0 in wanted:
        times.append(0.0)
        out.append(state)
    rho = houli_symbol(grid) if filter else None
    for step in range(1, n_steps + 1):
        y = _rk8(grid, y, dt, g, lam, solver)
        if rho is not None:
            y = np.fft.irfft(np.fft.rfft(y, axis=-1) * rho, n=grid.M, axis=-1)
        size = float(np.max(np.abs(y[0])))
        if not np.isfinite(size) or size > blowup_bound:
            raise BlowUpError(
                f"surface exceeded blow-up bound {blowup_bound:g} at step {step} "
                f"(t = {step * dt:.6g})",
                step=step, time=step * dt, value=size,
            )
        if callback is not None or step in wanted:
            s = _unpack(grid, y)
            if callback is not None:
                callback(step, step * dt, s)
            if step in wanted:
                times.append(step * dt)
                out.append(s)
    return np.array(times), out


def energy(state: SurfaceState, g: float = 1.0, lam: float = 0.0) -> float:
    """Kinetic plus potential (plus surface) energy over one period."""
    h, phi = state.h, state.phi
    Gphi = dno_bim(h, phi).values
    kin = 0.5 * np.mean(phi.values * Gphi)
    pot = 0.5 * g * np.mean(h.values ** 2)
    surf = 0.0
    if lam:
        hx = derivative(h).values
        surf = lam * np.mean(np.sqrt(1.0 + hx ** 2) - 1.0)
    return float(2.0 * np.pi * (kin + pot + surf))


def kinetic_energy(state: SurfaceState) -> float:
    Gphi = dno_bim(state.h, state.phi).values
    return float(np.pi * np.mean(state.phi.values * Gphi))
