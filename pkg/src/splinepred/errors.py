"""Exception types shared across the package."""


class SplinepredError(Exception):
    """Base class for all errors raised by this package."""


class IntegrationDivergedError(SplinepredError):
    """The integrator produced a non-finite state."""


class InvalidGridError(SplinepredError):
    """Sample times are not strictly increasing."""


class InvalidDataError(SplinepredError):
    """Observations contain non-finite values."""


class InsufficientDataError(SplinepredError):
    """Not enough samples for the requested operation."""


class GridMismatchError(SplinepredError):
    """A delay or lookahead is not an integer multiple of the sample step."""


class SolverError(SplinepredError):
    """A linear or quadratic solve failed."""


class ConvergenceError(SolverError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, kkt_gap=None, iterations=None):
        super().__init__(message)
        self.kkt_gap = kkt_gap
        self.iterations = iterations


class ConfigError(SplinepredError):
    """A benchmark configuration file could not be parsed."""
