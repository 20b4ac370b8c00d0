"""Exception types raised by the solver."""


class UGKSError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(UGKSError, ValueError):
    """Invalid parameters or an inconsistent configuration."""


class DegenerateStateError(UGKSError, ArithmeticError):
    """Non-positive density/temperature, or a singular moment system."""

    def __init__(self, message, cell=None):
        if cell is not None:
            message = f"{message} (cell {cell})"
        super().__init__(message)
        self.cell = cell


class ResolutionError(UGKSError, ValueError):
    """The velocity grid cannot hold the requested distribution."""


class NumericError(UGKSError, ArithmeticError):
    """NaN or overflow produced by a transform."""


class ConvergenceError(UGKSError, RuntimeError):
    """A steady-state iteration failed to reach its residual target."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)
