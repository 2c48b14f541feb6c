import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import band_limited
from hwaves.errors import BlowUpError, GridMismatchError, ParameterError
from hwaves.euler import (
    BIMSolver,
    SurfaceState,
    dno_bim,
    dno_series,
    energy,
    euler_rhs,
    evolve_euler,
    kernel_matrix,
    rk8_step,
    solve_mu,
    surface_velocity,
)
from hwaves.spectral import PeriodicGrid, inner_physical, lambda_pow, mean, transform

G = PeriodicGrid(64)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def f(fn, grid=G):
    return transform(grid, fn(grid.x))


def close(a, b, tol=1e-12):
    return np.abs(a.values - b.values).max() <= tol


def zeros():
    return G.zeros()


def kernel_closed_form(h, dh, a, b):
    # off-diagonal kernel at continuous arguments
    za, zb = a + 1j * h(a), b + 1j * h(b)
    return 0.5 * (1 + 1j * dh(b)) / np.tan((zb - za) / 2) - 0.5 / np.tan((b - a) / 2)


# ---- kernel and dipole solve


def test_flat_kernel_vanishes():
    assert np.abs(kernel_matrix(zeros())).max() < 1e-15


def test_kernel_entries_and_diagonal_limit():
    h = lambda x: 0.1 * np.sin(x) + 0.05 * np.cos(2 * x)  # noqa: E731
    dh = lambda x: 0.1 * np.cos(x) - 0.1 * np.sin(2 * x)  # noqa: E731
    K = kernel_matrix(f(h))
    x = G.x
    i, j = 3, 17
    assert abs(K[i, j] - kernel_closed_form(h, dh, x[i], x[j])) < 1e-13
    for i in (0, 5, 40):
        # the O(delta) terms of the two one-sided limits cancel
        lim = 0.5 * sum(kernel_closed_form(h, dh, x[i], x[i] + d) for d in (1e-4, -1e-4))
        assert abs(K[i, i] - lim) < 1e-6


def test_solve_mu_flat():
    assert close(transform(G, solve_mu(zeros(), f(np.cos))), f(lambda x: -2 * np.cos(x)))
    assert np.abs(solve_mu(zeros(), zeros())).max() == 0


def test_solve_mu_residual():
    h, phi = f(lambda x: 0.1 * np.sin(x)), f(np.cos)
    K = kernel_matrix(h)
    mu = solve_mu(h, phi, K)
    res = -0.5 * mu + (K.imag @ mu) / G.M - phi.values
    assert np.abs(res).max() <= 1e-12 * np.abs(phi.values).max()


def test_solve_mu_grid_mismatch():
    with pytest.raises(GridMismatchError):
        solve_mu(zeros(), PeriodicGrid(32).zeros())


@pytest.mark.parametrize(
    "phi, u, v",
    [
        (np.cos, lambda x: -np.sin(x), np.cos),
        (lambda x: np.sin(2 * x), lambda x: 2 * np.cos(2 * x), lambda x: 2 * np.sin(2 * x)),
        (lambda x: 0 * x, lambda x: 0 * x, lambda x: 0 * x),
    ],
)
def test_flat_surface_velocity(phi, u, v):
    p = f(phi)
    got_u, got_v = surface_velocity(zeros(), solve_mu(zeros(), p))
    assert close(got_u, f(u)) and close(got_v, f(v))


def test_solver_methods_agree():
    h, phi = f(lambda x: 0.2 * np.sin(x)), f(np.cos)
    out = []
    for method in ("direct", "gmres"):
        s = BIMSolver(G, method=method)
        s.set_surface(h)
        out.append(s.velocity(s.solve(phi.values)))
    ref = surface_velocity(h, solve_mu(h, phi))
    for u, v in out:
        assert np.abs(u - ref[0].values).max() < 1e-12 and np.abs(v - ref[1].values).max() < 1e-12
    with pytest.raises(ParameterError):
        BIMSolver(G, method="lsqr")


# ---- right-hand side


def test_euler_rhs_examples():
    dh, dphi = euler_rhs(SurfaceState(zeros(), zeros()))
    assert close(dh, zeros()) and close(dphi, zeros())
    dh, dphi = euler_rhs(SurfaceState(f(lambda x: 0.3 * np.cos(x)), zeros()), g=2.0)
    assert close(dh, zeros()) and close(dphi, f(lambda x: -0.6 * np.cos(x)))
    dh, dphi = euler_rhs(SurfaceState(zeros(), f(np.cos)))
    assert close(dh, f(np.cos)) and close(dphi, f(lambda x: 0.5 * np.cos(2 * x)))


def test_euler_rhs_mean_free():
    rng = np.random.default_rng(2)
    s = SurfaceState(0.1 * band_limited(rng, G, 8), band_limited(rng, G, 8))
    dh, dphi = euler_rhs(s, lam=0.1)
    assert abs(mean(dh)) < 1e-12 and mean(dphi) == 0


def test_surface_state_validation():
    bad = zeros()
    bad.coeffs[1] = np.inf
    with pytest.raises(ParameterError):
        SurfaceState(bad, zeros())
    with pytest.raises(GridMismatchError):
        SurfaceState(zeros(), PeriodicGrid(32).zeros())


# ---- Dirichlet-Neumann operator


def test_dno_flat():
    assert close(dno_bim(zeros(), f(np.cos)), f(np.cos))
    assert close(dno_bim(zeros(), transform(G, np.full(64, 3.0))), zeros())
    psi = band_limited(np.random.default_rng(0), G, 20)
    assert close(dno_series(f(np.cos), psi, 0), lambda_pow(psi))


def test_dno_series_first_order_examples():
    g1 = dno_series(f(lambda x: np.cos(2 * x)), f(np.cos), 1) - dno_series(f(lambda x: np.cos(2 * x)), f(np.cos), 0)
    assert close(g1, f(lambda x: -np.cos(x)), 1e-13)
    g1 = dno_series(f(np.cos), f(np.cos), 1) - dno_series(f(np.cos), f(np.cos), 0)
    assert close(g1, zeros(), 1e-13)
    with pytest.raises(ParameterError):
        dno_series(zeros(), zeros(), -1)


def test_dno_series_converges_to_bim():
    prof, psi = f(lambda x: np.cos(x) + 0.5 * np.sin(2 * x)), f(np.cos)
    eps = np.array([0.04, 0.02, 0.01])
    slopes = {}
    for J in (1, 2):
        errs = [np.sqrt(np.mean((dno_bim(e * prof, psi) - dno_series(e * prof, psi, J)).values ** 2)) for e in eps]
        slopes[J] = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert abs(slopes[1] - 2) < 0.25 and abs(slopes[2] - 3) < 0.25


@settings(max_examples=10)
@given(seeds)
def test_dno_self_adjoint(seed):
    rng = np.random.default_rng(seed)
    h = 0.1 * band_limited(rng, G, 6)
    a, b = band_limited(rng, G, 12), band_limited(rng, G, 12)
    lhs = inner_physical(a, dno_bim(h, b))
    rhs = inner_physical(dno_bim(h, a), b)
    assert abs(lhs - rhs) < 1e-10


# ---- time stepping and energy


def test_energy_examples():
    assert energy(SurfaceState(zeros(), zeros())) == 0
    assert abs(energy(SurfaceState(zeros(), f(np.cos))) - np.pi / 2) < 1e-13
    assert abs(energy(SurfaceState(f(np.cos), zeros()), g=2.0) - np.pi) < 1e-13


def test_zero_state_stays_zero():
    s = rk8_step(SurfaceState(zeros(), zeros()), 0.1)
    assert np.abs(s.h.values).max() == 0 and np.abs(s.phi.values).max() == 0
    with pytest.raises(ParameterError):
        rk8_step(SurfaceState(zeros(), zeros()), 0.0)


def test_rk8_self_convergence():
    g = PeriodicGrid(32)
    s0 = SurfaceState(transform(g, 0.1 * np.cos(g.x)), g.zeros())
    finals = [evolve_euler(s0, 1.0, n, filter=False)[1][-1].h.values for n in (2, 4, 32)]
    e = [np.abs(finals[i] - finals[-1]).max() for i in range(2)]
    assert np.log2(e[0] / e[1]) > 7


def test_linear_regime_matches_linear_model():
    from hwaves.harness import init_example1

    eps = 1e-4
    g = PeriodicGrid(64)
    wave, surf = init_example1(eps, g)
    _, out = evolve_euler(surf, 0.625, 40)
    # linear solution from the closed form per mode
    w = np.sqrt(g.k.astype(float))
    lin = wave.h.coeffs * np.cos(w * 0.625) + np.divide(wave.ht.coeffs, w, where=w > 0, out=np.zeros_like(wave.ht.coeffs)) * np.sin(w * 0.625)
    diff = np.abs(out[-1].h.coeffs - lin).max()
    assert diff < 10 * eps**2


def test_mean_and_energy_conserved():
    from hwaves.harness import init_example1

    g = PeriodicGrid(64)
    _, surf = init_example1(0.3, g)
    E0, m0 = energy(surf), mean(surf.h)
    _, out = evolve_euler(surf, 0.3, 60, filter=False)
    assert abs(energy(out[-1]) - E0) / E0 < 1e-8
    assert abs(mean(out[-1].h) - m0) < 1e-12


def test_blow_up_detection():
    s = SurfaceState(f(lambda x: 0.1 * np.cos(x)), zeros())
    with pytest.raises(BlowUpError):
        evolve_euler(s, 0.1, 2, blowup_bound=0.01)
    with pytest.raises(ParameterError):
        evolve_euler(s, 0.1, 0)
