import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import band_limited
from hwaves.errors import BlowUpError, ConvergenceError, ParameterError
from hwaves.etd import (
    BlockDiagonalWaveOperator,
    CollocationScheme,
    etd_step,
    evolve,
    exp_weights,
    lagrange_monomials,
    lobatto_nodes,
    phi_functions,
)
from hwaves.models import ModelKind, WaveState, build_system, state_to_array
from hwaves.spectral import PeriodicGrid, SpectralField, houli_symbol, transform

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def scalar(z):
    return BlockDiagonalWaveOperator(np.array([[[z]]], dtype=complex))


def zero_N(t, U):
    return np.zeros_like(U)


# ---- nodes and weights


def test_lobatto_nodes():
    assert list(lobatto_nodes(1)) == [0.0, 1.0]
    assert list(lobatto_nodes(2)) == [0.0, 0.5, 1.0]
    r = np.sqrt(2) / 4
    assert np.abs(lobatto_nodes(4) - [0, 0.5 - r, 0.5, 0.5 + r, 1]).max() < 1e-15
    for nu in range(1, 9):
        c = lobatto_nodes(nu)
        assert np.all(np.diff(c) > 0) and np.abs(c + c[::-1] - 1).max() < 1e-15
    for bad in (0, -1, 2.5):
        with pytest.raises(ParameterError):
            lobatto_nodes(bad)


def test_lagrange_cardinal():
    c = lobatto_nodes(5)
    a = lagrange_monomials(c)
    vals = np.polynomial.polynomial.polyval(c, a.T)  # vals[i, j] = l_j(c_i)
    assert np.abs(vals - np.eye(6)).max() < 1e-12


def test_trapezoid_and_simpson():
    w1 = exp_weights(scalar(0), 1.0, 1).W[1, :, 0, 0, 0]
    assert np.abs(w1 - [0.5, 0.5]).max() < 1e-15
    w2 = exp_weights(scalar(0), 1.0, 2).W[2, :, 0, 0, 0]
    assert np.abs(w2 - [1 / 6, 2 / 3, 1 / 6]).max() < 1e-15


def test_weight_sum_is_phi1():
    z = 1j * np.pi
    w = exp_weights(scalar(z), 1.0, 1).W[1, :, 0, 0, 0]
    assert abs(w.sum() - (np.exp(z) - 1) / z) < 1e-15


def test_phi_functions_continuous_across_switch():
    z = np.array([0.999999, 1.000001, -0.999999j, -1.000001j])
    p = phi_functions(z, 5)
    assert np.abs(p[:, 0] - p[:, 1]).max() < 1e-5 and np.abs(p[:, 2] - p[:, 3]).max() < 1e-5
    # phi_m(0) = 1/m!
    assert np.abs(phi_functions(np.array([0.0]), 6)[:, 0] - [1 / math.factorial(m) for m in range(7)]).max() == 0


@given(st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False))
def test_phi_recursion_identity(z):
    p = phi_functions(np.array([z]), 4)[:, 0]
    for m in range(4):
        assert abs(z * p[m + 1] + 1 / math.factorial(m) - p[m]) <= 1e-12 * max(1, abs(p[m]))


def test_weights_reject_bad_inputs():
    with pytest.raises(ParameterError):
        exp_weights(scalar(0), 0.0, 2)
    with pytest.raises(ParameterError):
        scalar(np.nan)
    with pytest.raises(ParameterError):
        BlockDiagonalWaveOperator(np.array([[[0, 1], [0, 0]]], dtype=complex))  # Jordan block


def test_collocation_scheme_default():
    assert CollocationScheme().nu == 4
    with pytest.raises(ParameterError):
        CollocationScheme(0)


# ---- steps


def test_scalar_exponential():
    # linear term in L: exact
    u = etd_step(np.array([[1.0]]), 0.1, scalar(1.0), zero_N, scheme=3)
    assert abs(u[0, 0] - np.exp(0.1)) < 1e-12
    # linear term in N: collocation on nodes 0, 1/4, 3/4, 1 has a local error O(dt^5)
    errs = [abs(etd_step(np.array([[1.0]]), dt, scalar(0), lambda t, U: U, scheme=3)[0, 0] - np.exp(dt)) for dt in (0.1, 0.05)]
    assert errs[0] < 1e-9 and 4.5 < np.log2(errs[0] / errs[1]) < 5.5


@pytest.mark.parametrize("nu", [1, 2, 3, 4])
def test_polynomial_forcing_is_exact(nu):
    # u' = t^p with L = 0 integrates exactly for p within the quadrature degree
    degree = nu if nu % 2 else nu + 1
    for p in range(degree + 1):
        u = etd_step(np.array([[0.0]]), 1.0, scalar(0), lambda t, U, p=p: np.broadcast_to(t[:, None, None] ** p, U.shape), scheme=nu)
        assert abs(u[0, 0] - 1 / (p + 1)) < 1e-14


def test_homogeneous_step_is_exact():
    G = PeriodicGrid(32)
    sys = build_system(ModelKind.linear(), 1.0, G)
    u0 = state_to_array(WaveState(band_limited(np.random.default_rng(4), G, 15), G.zeros()))
    for dt in (0.01, 0.7, 5.0):
        u = etd_step(u0, dt, sys.L, zero_N)
        assert np.abs(u - np.einsum("nab,bn->an", sys.L.expm(dt), u0)).max() < 1e-12


def test_linear_model_cosine():
    G = PeriodicGrid(32)
    sys = build_system(ModelKind.linear(), 1.0, G)
    u0 = state_to_array(WaveState(transform(G, np.cos(G.x)), G.zeros()))
    for dt in (0.1, 1.3):
        u = etd_step(u0, dt, sys.L, sys.N)
        h = SpectralField(G, u[0]).values
        assert np.abs(h - np.cos(G.x) * np.cos(dt)).max() < 1e-13


def test_linear_full_period_round_trip():
    G = PeriodicGrid(32)
    sys = build_system(ModelKind.linear(), 1.0, G)
    u0 = state_to_array(WaveState(transform(G, np.cos(G.x)), G.zeros()))
    _, U = evolve(u0, 2 * np.pi, 50, sys.L, sys.N)
    assert np.abs(U[-1] - u0).max() < 1e-10


def test_convergence_error_when_not_contracting():
    with pytest.raises(ConvergenceError) as info:
        etd_step(np.array([[1.0]]), 1.0, scalar(0), lambda t, U: 50 * U, max_iter=20)
    assert info.value.residual > 0
    with pytest.raises(ParameterError):
        etd_step(np.array([[1.0]]), 1.0, scalar(0), zero_N, tol=0)


def test_evolve_errors():
    with pytest.raises(ParameterError):
        evolve(np.array([[1.0]]), 1.0, 0, scalar(0), zero_N)
    with pytest.raises(ParameterError):
        evolve(np.array([[1.0]]), 1.0, 4, scalar(0), zero_N, output_steps=[5])
    with pytest.raises(BlowUpError) as info:
        evolve(np.array([[1.0]]), 10.0, 100, scalar(3.0), zero_N, blowup_bound=1e6)
    assert info.value.step == 44  # monitor 2 e^{0.3 k} exceeds 1e6 first at k = 44


def test_quadratic_self_convergence():
    from hwaves.harness import init_example1

    G = PeriodicGrid(64)
    state, _ = init_example1(0.1, G)
    sys = build_system(ModelKind.quadratic(), 1.0, G)
    u0 = state_to_array(state)
    finals = [evolve(u0, 0.625, n, sys.L, sys.N, filter_symbol=houli_symbol(G))[1][-1] for n in (2, 4, 8, 64)]
    errs = [np.abs(u - finals[-1]).max() for u in finals[:-1]]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 5)  # design order nu + 2 = 6 for nu = 4


def test_mean_of_h_is_conserved():
    G = PeriodicGrid(64)
    sys = build_system(ModelKind.cubic(), 1.0, G)
    rng = np.random.default_rng(0)
    h = band_limited(rng, G, 10)
    u0 = state_to_array(WaveState(0.05 * h, 0.05 * band_limited(rng, G, 10)))
    _, U = evolve(u0, 1.0, 20, sys.L, sys.N, output_steps=range(21))
    assert np.abs(U[:, 0, 0] - u0[0, 0]).max() < 1e-13


@given(seeds, st.integers(1, 63))
def test_translation_equivariance(seed, shift):
    G = PeriodicGrid(64)
    sys = build_system(ModelKind.quadratic(), 1.0, G)
    rng = np.random.default_rng(seed)
    u0 = 0.05 * state_to_array(WaveState(band_limited(rng, G, 15), band_limited(rng, G, 15)))
    phase = np.exp(-1j * G.k * 2 * np.pi * shift / G.M)
    a = etd_step(u0 * phase, 0.05, sys.L, sys.N)
    b = etd_step(u0, 0.05, sys.L, sys.N) * phase
    assert np.abs(a - b).max() < 1e-12
