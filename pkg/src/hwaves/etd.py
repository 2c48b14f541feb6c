"""Arbitrary-order exponential time differencing by Chebyshev-Lobatto collocation.

Solves ``u_t = L u + N(t, u)`` where ``L`` is block diagonal in Fourier space:
mode ``k`` of every component couples only through a small ``d x d`` block
``A_k``.  A step of size ``dt`` looks for node values ``u_1..u_nu`` with

    u_r = exp(c_r dt L) u_0 + dt * sum_j W_rj N(c_j dt, u_j),
    W_rj = int_0^{c_r} exp((c_r - s) dt L) l_j(s) ds,

where ``l_j`` are the Lagrange polynomials on the nodes ``c_j``.  The weights
are evaluated per eigenvalue via phi-functions and mapped back through the
eigenvectors of each block.

States are complex arrays of shape ``(d, n)``: ``d`` components, ``n`` modes.
The nonlinearity is called as ``N(t, u)`` with ``u`` of shape ``(..., d, n)``
and ``t`` broadcastable to the leading shape, so all nodes are evaluated in
one batched call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError, ConvergenceError, InvalidDataError, ParameterError

__all__ = [
    "BlockDiagonalWaveOperator",
    "CollocationScheme",
    "ExpWeights",
    "StepInfo",
    "lobatto_nodes",
    "lagrange_monomials",
    "phi_functions",
    "exp_weights",
    "etd_step",
    "evolve",
]

_TAYLOR_RADIUS = 1.0
_TAYLOR_TERMS = 30


def lobatto_nodes(nu: int) -> np.ndarray:
    """Chebyshev-Lobatto nodes ``(1 - cos(pi j / nu)) / 2`` on ``[0, 1]``."""
    if int(nu) != nu or nu < 1:
        raise ParameterError(f"collocation degree must be a positive integer, got {nu}")
    j = np.arange(int(nu) + 1)
    c = 0.5 * (1.0 - np.cos(np.pi * j / nu))
    # exact endpoints and midpoint
    c[0], c[-1] = 0.0, 1.0
    if nu % 2 == 0:
        c[nu // 2] = 0.5
    return c


@dataclass(frozen=True)
class CollocationScheme:
    nu: int = 4

    def __post_init__(self):
        lobatto_nodes(self.nu)

    @property
    def nodes(self) -> np.ndarray:
        return lobatto_nodes(self.nu)


def lagrange_monomials(nodes: Sequence[float]) -> np.ndarray:
    """``a[j, m]``: coefficient of ``s**m`` in the ``j``-th Lagrange polynomial."""
    c = np.asarray(nodes, dtype=float)
    V = np.vander(c, increasing=True)
    # l_j(c_i) = delta_ij  <=>  V @ a.T = I
    return np.linalg.solve(V, np.eye(len(c))).T


def phi_functions(z, mmax: int) -> np.ndarray:
    """``phi_0..phi_mmax`` at ``z``; output shape ``(mmax + 1,) + z.shape``.

    ``phi_0 = exp`` and ``phi_{m+1}(z) = (phi_m(z) - 1/m!) / z``.  The
    recurrence cancels badly for small ``|z|``, so the Taylor series
    ``phi_m(z) = sum_i z**i / (i + m)!`` is used for ``|z| < 1``.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty((mmax + 1,) + z.shape, dtype=complex)
    small = np.abs(z) < _TAYLOR_RADIUS
    zs = z[small]
    for m in range(mmax + 1):
        acc = np.zeros_like(zs)
        for i in range(_TAYLOR_TERMS - 1, -1, -1):
            acc = acc * zs + 1.0 / math.factorial(i + m)
        out[m][small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        p = np.exp(zb)
        out[0][big] = p
        for m in range(mmax):
            p = (p - 1.0 / math.factorial(m)) / zb
            out[m + 1][big] = p
    return out


@dataclass(frozen=True, eq=False)
class BlockDiagonalWaveOperator:
    """Per-mode ``d x d`` blocks ``A_k = Q_k diag(S_k) Q_k^{-1}``.

    ``blocks`` has shape ``(n, d, d)``.  The eigendecomposition is computed
    once at construction; blocks that are not diagonalizable are rejected.
    """

    blocks: np.ndarray
    eigvals: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)
    Qinv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.blocks, dtype=complex)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ParameterError(f"blocks must have shape (n, d, d), got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ParameterError("operator blocks must be finite")
        lam, Q = np.linalg.eig(A)
        # zero blocks: keep the identity basis exactly
        zero = np.all(A == 0, axis=(1, 2))
        lam[zero] = 0.0
        Q[zero] = np.eye(A.shape[1])
        cond = np.linalg.cond(Q)
        if np.any(~np.isfinite(cond)) or np.any(cond > 1e8):
            bad = int(np.argmax(np.where(np.isfinite(cond), cond, np.inf)))
            raise ParameterError(f"block {bad} is (nearly) defective; cond(Q) = {cond[bad]:.3g}")
        object.__setattr__(self, "blocks", A)
        object.__setattr__(self, "eigvals", lam)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "Qinv", np.linalg.inv(Q))

    @property
    def nmodes(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim(self) -> int:
        return self.blocks.shape[1]

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("nab,...bn->...an", self.blocks, u)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("nab,nb,nbc->nac", self.Q, self.eigvals, self.Qinv)

    def matrix_function(self, values: np.ndarray) -> np.ndarray:
        """``Q diag(values) Q^{-1}`` per mode; ``values`` shaped ``(..., n, d)``."""
        return np.einsum("nab,...nb,nbc->...nac", self.Q, values, self.Qinv)

    def expm(self, t: float) -> np.ndarray:
        return self.matrix_function(np.exp(t * self.eigvals))


@dataclass(frozen=True, eq=False)
class ExpWeights:
    """Propagators ``E[r] = exp(c_r dt L)`` and weights ``W[r, j]`` (per-mode blocks)."""

    dt: float
    nodes: np.ndarray
    E: np.ndarray  # (nu + 1, n, d, d)
    W: np.ndarray  # (nu + 1, nu + 1, n, d, d)


def exp_weights(L: BlockDiagonalWaveOperator, dt: float, scheme: CollocationScheme | int = 4) -> ExpWeights:
    if isinstance(scheme, (int, np.integer)):
        scheme = CollocationScheme(int(scheme))
    if not np.isfinite(dt) or dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    c = scheme.nodes
    nu = scheme.nu
    a = lagrange_monomials(c)
    z = dt * L.eigvals  # (n, d)
    if not np.all(np.isfinite(z)):
        raise ParameterError("non-finite eigenvalue in the linear operator")
    E = np.empty((nu + 1,) + L.blocks.shape, dtype=complex)
    W = np.zeros((nu + 1, nu + 1) + L.blocks.shape, dtype=complex)
    fact = np.array([math.factorial(m) for m in range(nu + 1)], dtype=float)
    for r in range(nu + 1):
        E[r] = L.matrix_function(np.exp(c[r] * z))
        if r == 0:
            continue
        phis = phi_functions(c[r] * z, nu + 1)  # (nu + 2, n, d)
        # int_0^c e^{(c-s)z} s^m ds = m! c^{m+1} phi_{m+1}(c z)
        mono = fact[:, None, None] * c[r] ** (np.arange(nu + 1)[:, None, None] + 1) * phis[1:]
        scal = np.einsum("jm,mnd->jnd", a, mono)  # (nu + 1, n, d)
        W[r] = L.matrix_function(scal)
    return ExpWeights(float(dt), c, E, W)


@dataclass
class StepInfo:
    iterations: int
    residual: float


def etd_step(
    u0: np.ndarray,
    dt: float,
    L: BlockDiagonalWaveOperator,
    N: Callable,
    scheme: CollocationScheme | int = 4,
    tol: float = 1e-12,
    max_iter: int = 100,
    t0: float = 0.0,
    weights: ExpWeights | None = None,
    damping: float = 1.0,
    guess: np.ndarray | None = None,
    return_info: bool = False,
):
    """Advance ``u0`` (shape ``(d, n)``) by one step of size ``dt``.

    The collocation equations are solved by (optionally damped) fixed-point
    iteration started from the linear propagation of ``u0`` or from
    ``guess`` (node values, shape ``(nu + 1, d, n)``).
    """
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    if not 0 < damping <= 1:
        raise ParameterError(f"damping must lie in (0, 1], got {damping}")
    if weights is None:
        weights = exp_weights(L, dt, scheme)
    u0 = np.asarray(u0, dtype=complex)
    E, W, c = weights.E, weights.W, weights.nodes
    t_nodes = t0 + c * dt
    lin = np.einsum("rnab,bn->ran", E, u0)
    U = lin.copy() if guess is None else np.array(guess, dtype=complex)
    U[0] = u0
    prev = np.inf
    res = np.inf
    for it in range(1, max_iter + 1):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                F = N(t_nodes, U)
        except InvalidDataError as exc:
            raise ConvergenceError(f"nonlinear term became non-finite at iteration {it}", np.inf, it) from exc
        new = lin + dt * np.einsum("rjnab,jbn->ran", W, F)
        new[0] = u0
        scale = max(np.max(np.abs(new)), np.finfo(float).tiny)
        res = float(np.max(np.abs(new - U)) / scale)
        if not np.isfinite(res):
            raise ConvergenceError("collocation iteration produced non-finite values", res, it)
        if res <= tol:
            U = new
            break
        if prev < 0.1 and res > prev:
            raise ConvergenceError(
                f"collocation iteration diverging (residual {res:.3e} after {prev:.3e})", res, it
            )
        prev = res
        U = U + damping * (new - U)
    else:
        raise ConvergenceError(
            f"collocation iteration did not reach tol={tol:g} in {max_iter} iterations "
            f"(residual {res:.3e})",
            res,
            max_iter,
        )
    if return_info:
        return U[-1], StepInfo(it, res), U
    return U[-1]


def evolve(
    u0: np.ndarray,
    t_final: float,
    n_steps: int,
    L: BlockDiagonalWaveOperator,
    N: Callable,
    scheme: CollocationScheme | int = 4,
    output_steps: Sequence[int] | None = None,
    filter_symbol: np.ndarray | None = None,
    blowup_bound: float = 1e6,
    tol: float = 1e-12,
    max_iter: int = 100,
    monitor: Callable[[np.ndarray], float] | None = None,
):
    """Uniform-step driver.

    Returns ``(times, states)`` with ``states`` of shape ``(n_out, d, n)`` at
    the step indices ``output_steps`` (default: only the final step; 0 means
    the initial state).  ``filter_symbol`` (length ``n``) multiplies every
    component after each accepted step.  ``monitor(u)`` returns the quantity
    compared against ``blowup_bound``; by default the largest coefficient
    magnitude of the first component, scaled by ``n``.
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise ParameterError(f"number of steps must be a positive integer, got {n_steps}")
    if not np.isfinite(t_final) or t_final <= 0:
        raise ParameterError(f"final time must be positive, got {t_final}")
    n_steps = int(n_steps)
    dt = t_final / n_steps
    if output_steps is None:
        output_steps = [n_steps]
    wanted = sorted(set(int(s) for s in output_steps))
    if wanted and (wanted[0] < 0 or wanted[-1] > n_steps):
        raise ParameterError("output steps must lie in [0, n_steps]")
    if monitor is None:
        def monitor(u):
            return float(2.0 * np.sum(np.abs(u[0])))
    weights = exp_weights(L, dt, scheme)
    u = np.array(u0, dtype=complex)
    out_t, out_u = [], []
    if wanted and wanted[0] == 0:
        out_t.append(0.0)
        out_u.append(u.copy())
    guess = None
    for step in range(1, n_steps + 1):
        t0 = (step - 1) * dt
        u, _, nodes = etd_step(
            u, dt, L, N, weights=weights, tol=tol, max_iter=max_iter, t0=t0,
            guess=guess, return_info=True,
        )
        if filter_symbol is not None:
            u = u * filter_symbol
        size = monitor(u)
        if not np.isfinite(size) or size > blowup_bound:
            raise BlowUpError(
                f"solution exceeded blow-up bound {blowup_bound:g} at step {step} "
                f"(t = {step * dt:.6g}, size {size:.3e})",
                step=step, time=step * dt, value=size,
            )
        # next step's initial guess: propagate the converged node values
        guess = np.einsum("rnab,bn->ran", weights.E, u) + (nodes - nodes[-1][None])
        if step in wanted:
            out_t.append(step * dt)
            out_u.append(u.copy())
    return np.array(out_t), np.array(out_u)
