import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hwaves.spectral import PeriodicGrid, SpectralField

# deterministic property tests: a fixed database-free derandomized profile
settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


def band_limited(rng, grid, band, batch=()):
    """Zero-mean random field on modes 1..band."""
    c = np.zeros(tuple(batch) + (grid.nmodes,), dtype=complex)
    shape = tuple(batch) + (band,)
    c[..., 1 : band + 1] = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / (2 * np.arange(1, band + 1))
    return SpectralField(grid, c)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid64():
    return PeriodicGrid(64)


_ACCEPTANCE = []


@pytest.fixture
def report_criterion():
    """Print a criterion's pass/fail line and keep it for the session summary."""

    def emit(result):
        line = result.line()
        print(line)
        _ACCEPTANCE.append((result.number, line))
        return result

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
