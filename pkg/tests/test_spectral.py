import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import band_limited
from hwaves.errors import DimensionError, GridMismatchError, InvalidDataError, UnsupportedOperationError
from hwaves.spectral import (
    PeriodicGrid,
    SpectralField,
    commutator,
    derivative,
    hilbert,
    houli_filter,
    houli_symbol,
    inner_physical,
    inner_spectral,
    inverse,
    l2_norm,
    lambda_pow,
    mean,
    multiply,
    project_zero_mean,
    transform,
    xtau_norm,
)


def field(grid, fn):
    return transform(grid, fn(grid.x))


def mode(grid, m, amp=1.0):
    """Exact coefficients of amp * cos(m x)."""
    c = np.zeros(grid.nmodes, dtype=complex)
    c[m] = amp / 2
    return SpectralField(grid, c)


def close(a, b, tol=1e-13):
    return np.abs(a.values - b.values).max() <= tol


# ---- grid and transform


def test_grid_points_uniform():
    g = PeriodicGrid(8)
    assert np.allclose(g.x, 2 * np.pi * np.arange(8) / 8, atol=0)
    assert g.nmodes == 5


@pytest.mark.parametrize("M", [0, 2, 7, -4])
def test_grid_rejects_bad_sizes(M):
    with pytest.raises(Exception):
        PeriodicGrid(M)


def test_transform_single_mode(grid64):
    f = field(grid64, np.cos)
    expect = np.zeros(grid64.nmodes, dtype=complex)
    expect[1] = 0.5
    assert np.abs(f.coeffs - expect).max() < 1e-15


def test_transform_constant(grid64):
    f = transform(grid64, np.ones(64))
    assert abs(f.coeffs[0] - 1) < 1e-15 and np.abs(f.coeffs[1:]).max() < 1e-15


def test_round_trip(grid64, rng):
    u = rng.standard_normal(64)
    assert np.abs(inverse(transform(grid64, u)) - u).max() < 1e-13


def test_transform_errors(grid64):
    with pytest.raises(DimensionError):
        transform(grid64, np.zeros(63))
    bad = np.zeros(64)
    bad[3] = np.nan
    with pytest.raises(InvalidDataError):
        transform(grid64, bad)


def test_real_valued_endpoints(grid64, rng):
    f = transform(grid64, rng.standard_normal(64))
    assert f.coeffs[0].imag == 0 and f.coeffs[-1].imag == 0


# ---- multipliers


def test_hilbert_examples(grid64):
    assert close(hilbert(field(grid64, np.cos)), field(grid64, np.sin))
    assert close(hilbert(field(grid64, np.sin)), -field(grid64, np.cos))
    assert close(hilbert(transform(grid64, np.ones(64))), grid64.zeros())


def test_lambda_examples(grid64):
    assert close(lambda_pow(field(grid64, np.cos)), field(grid64, np.cos), 1e-13)
    assert close(lambda_pow(mode(grid64, 2), 3), mode(grid64, 2, 8.0))
    assert close(lambda_pow(transform(grid64, 3 * np.ones(64))), grid64.zeros())
    with pytest.raises(UnsupportedOperationError):
        lambda_pow(field(grid64, np.cos), -1)


def test_derivative_examples(grid64):
    assert close(derivative(field(grid64, np.cos)), -field(grid64, np.sin))
    assert close(derivative(transform(grid64, np.ones(64))), grid64.zeros())


def test_nyquist_mode_killed(grid64):
    c = np.zeros(grid64.nmodes, dtype=complex)
    c[-1] = 1.0
    f = SpectralField(grid64, c)
    for op in (derivative, lambda_pow, hilbert):
        assert np.abs(op(f).coeffs).max() == 0


def test_projections(grid64):
    f = field(grid64, lambda x: 2 + np.cos(x))
    assert close(project_zero_mean(f), field(grid64, np.cos))
    assert abs(mean(f) - 2) < 1e-15
    assert abs(mean(field(grid64, lambda x: np.sin(3 * x)))) < 1e-15


def test_multiply_examples(grid64):
    c, s = field(grid64, np.cos), field(grid64, np.sin)
    for dealias in (False, True):
        assert close(multiply(c, c, dealias), field(grid64, lambda x: 0.5 + 0.5 * np.cos(2 * x)))
        assert close(multiply(c, s, dealias), field(grid64, lambda x: 0.5 * np.sin(2 * x)))
        assert close(multiply(c, grid64.zeros(), dealias), grid64.zeros())


def test_multiply_grid_mismatch():
    with pytest.raises(GridMismatchError):
        multiply(PeriodicGrid(8).zeros(), PeriodicGrid(16).zeros())


def test_dealiased_product_is_exact_on_retained_modes(rng):
    g = PeriodicGrid(32)
    a, b = band_limited(rng, g, 15), band_limited(rng, g, 15)
    big = PeriodicGrid(128)
    pad = lambda f: SpectralField(big, np.concatenate([f.coeffs[:-1], np.zeros(big.nmodes - g.nmodes + 1)]))
    exact = multiply(pad(a), pad(b)).coeffs[: g.nmodes - 1]
    assert np.abs(multiply(a, b, dealias=True).coeffs[:-1] - exact).max() < 1e-14


# ---- filter and norms


def test_houli_symbol():
    g = PeriodicGrid(64)
    rho = houli_symbol(g)
    assert rho[0] == 1.0
    assert abs(rho[-1] - np.exp(-36)) < 1e-30
    f = band_limited(np.random.default_rng(1), g, 31)
    twice = houli_filter(houli_filter(f))
    assert np.abs(twice.coeffs - f.coeffs * rho**2).max() < 1e-16
    assert np.abs(twice.coeffs - houli_filter(f).coeffs).max() > 0  # not idempotent


def test_xtau_examples(grid64):
    assert abs(xtau_norm(mode(grid64, 1), 1.0) - np.e) < 1e-14
    assert xtau_norm(grid64.zeros(), 2.0) == 0
    assert abs(xtau_norm(mode(grid64, 2), 0.0) - 1) < 1e-14


def test_l2_norm_of_cosine(grid64):
    assert abs(l2_norm(field(grid64, np.cos)) - np.sqrt(np.pi)) < 1e-14


def test_commutator_convention(grid64):
    # [a, H] b = a Hb - H(ab); with a = cos, b = cos: cos sin - H(1/2 + cos 2x / 2) = sin 2x/2 - sin 2x/2
    a = field(grid64, np.cos)
    assert close(commutator(a, a), grid64.zeros())
    s = field(grid64, np.sin)
    # a = cos, b = sin: cos(-cos) - H(sin 2x / 2) = -cos^2 + cos 2x / 2 = -1/2
    assert close(commutator(a, s), transform(grid64, -0.5 * np.ones(64)))


# ---- properties

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds)
def test_hilbert_squared_is_minus_identity(seed):
    g = PeriodicGrid(64)
    f = band_limited(np.random.default_rng(seed), g, 31)
    assert close(hilbert(hilbert(f)), -f)


@given(seeds)
def test_derivative_of_hilbert_is_lambda(seed):
    g = PeriodicGrid(64)
    f = band_limited(np.random.default_rng(seed), g, 31)
    assert close(derivative(hilbert(f)), lambda_pow(f), 1e-12)


@given(seeds)
def test_tricomi(seed):
    g = PeriodicGrid(64)
    f = band_limited(np.random.default_rng(seed), g, 15)
    lhs = 2 * hilbert(multiply(f, hilbert(f)))
    rhs = multiply(hilbert(f), hilbert(f)) - multiply(f, f)
    assert close(lhs, rhs, 1e-12)


@given(seeds)
def test_parseval(seed):
    g = PeriodicGrid(64)
    rng = np.random.default_rng(seed)
    f, h = transform(g, rng.standard_normal(64)), transform(g, rng.standard_normal(64))
    assert abs(inner_physical(f, h) - inner_spectral(f, h)) < 1e-13


@given(seeds, st.floats(0, 3), st.floats(0, 3))
def test_xtau_monotone(seed, t1, t2):
    g = PeriodicGrid(32)
    f = band_limited(np.random.default_rng(seed), g, 10)
    lo, hi = sorted((t1, t2))
    assert xtau_norm(f, lo) <= xtau_norm(f, hi) * (1 + 1e-15)


@given(seeds)
def test_projection_is_idempotent(seed):
    g = PeriodicGrid(32)
    f = transform(g, np.random.default_rng(seed).standard_normal(32))
    p = project_zero_mean(f)
    assert close(project_zero_mean(p), p) and close(p + transform(g, np.full(32, mean(f))), f)


@given(seeds)
def test_commutator_identities(seed):
    from hwaves.validation import operator_identity_residuals

    worst = operator_identity_residuals(seed % 2**32, count=2, M=64)
    assert len(worst) == 8 and max(worst.values()) <= 1e-11
