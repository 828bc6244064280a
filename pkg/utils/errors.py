"""Exception and warning types shared across the lab."""


class QstLabError(Exception):
    """Base class for every error raised by the lab."""

    exit_code = 2


class ConfigurationError(QstLabError, ValueError):
    """Invalid chain specification or scenario configuration."""

    def __init__(self, message: str, field: str = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ValidationError(QstLabError, ValueError):
    """Invalid runtime input (normalization, dimensions, sites)."""


class UnsupportedError(QstLabError):
    """A closed-form result was requested outside its verified range."""


class CapacityError(QstLabError):
    """Fock sector larger than the desk-scale cap."""


class NumericalFailure(QstLabError, ArithmeticError):
    """The eigensolver did not converge within its sweep budget."""

    exit_code = 3

    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(f"{message} (worst residual {residual:.3e})")


class QstLabWarning(UserWarning):
    """Non-fatal numerical note (renormalized packet, skipped fixed point)."""
