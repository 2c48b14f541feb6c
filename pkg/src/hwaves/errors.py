"""Exception hierarchy shared by every module of the package."""


class HWavesError(Exception):
    """Base class for all package errors."""


class DimensionError(HWavesError, ValueError):
    """Array length does not match the grid."""


class InvalidDataError(HWavesError, ValueError):
    """Non-finite or otherwise unusable input data."""


class GridMismatchError(HWavesError, ValueError):
    """Two fields live on different grids."""


class ParameterError(HWavesError, ValueError):
    """A scalar parameter is outside its admissible range."""


class UnsupportedOperationError(HWavesError):
    """The requested operation is not defined for these arguments."""


class StateError(HWavesError, RuntimeError):
    """An object was used before the data it depends on was computed."""


class ConvergenceError(HWavesError, RuntimeError):
    """An iterative solve did not reach its tolerance.

    ``residual`` carries the last residual norm and ``iterations`` the
    number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BlowUpError(HWavesError, RuntimeError):
    """The solution exceeded the blow-up bound during time stepping."""

    def __init__(self, message, step=-1, time=float("nan"), value=float("nan")):
        super().__init__(message)
        self.step = step
        self.time = time
        self.value = value


class SolverError(HWavesError, RuntimeError):
    """A linear solve failed or was too ill-conditioned to trust."""

    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition
