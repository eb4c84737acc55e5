"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class CollimationError(DomainError):
    """|u| >= 1: the moment map is singular on the collimation boundary."""


class ConvergenceError(ArithmeticError):
    """An iterative solver or quadrature failed to reach its tolerance."""

    def __init__(self, message, residual=None, cell=None):
        super().__init__(message)
        self.residual = residual
        self.cell = cell


class PositivityError(ArithmeticError):
    """A solver update produced a non-admissible state (n <= 0 or |u| >= 1)."""

    def __init__(self, message, cell=None, time=None):
        super().__init__(message)
        self.cell = cell
        self.time = time


class QuadratureSpecError(ValueError):
    """A QuadratureSpec whose cutoff cannot reach the tail threshold."""


class ConfigError(ValueError):
    """Invalid scenario configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
