"""Asymptotic water-wave h-models, a spectral ETD integrator, a boundary-integral
Euler reference solver and the Stokes-series engine.

Modules: :mod:`~hwaves.spectral` (grids and Fourier multipliers),
:mod:`~hwaves.models` (model right-hand sides and first-order systems),
:mod:`~hwaves.etd` (exponential collocation integrator),
:mod:`~hwaves.euler` (free-surface Euler reference),
:mod:`~hwaves.stokes` (Stokes cascade and Catalan majorant) and
:mod:`~hwaves.harness` (examples, convergence studies, I/O).
"""

from .errors import (
    BlowUpError,
    ConvergenceError,
    DimensionError,
    GridMismatchError,
    HWavesError,
    InvalidDataError,
    ParameterError,
    SolverError,
    StateError,
    UnsupportedOperationError,
)
from .kernels import BACKEND
from .spectral import PeriodicGrid, SpectralField, transform

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BlowUpError",
    "ConvergenceError",
    "DimensionError",
    "GridMismatchError",
    "HWavesError",
    "InvalidDataError",
    "ParameterError",
    "PeriodicGrid",
    "SolverError",
    "SpectralField",
    "StateError",
    "UnsupportedOperationError",
    "transform",
]
