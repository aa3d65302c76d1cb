"""Exception hierarchy.

Numerical failures carry a ``diagnostics`` dict (e.g. the offending j, n, r)
that the CLI prints before exiting with status 3.
"""


class RingGasError(Exception):
    """Base class for all package errors."""


class ConfigError(RingGasError, ValueError):
    """Bad user configuration (CLI exit status 2)."""


class DomainError(RingGasError, ValueError):
    """Argument outside the mathematical domain (e.g. r <= 0)."""


class UnsupportedOrderError(RingGasError, ValueError):
    """Derivative order beyond what the potential can provide."""


class InvalidPotentialError(RingGasError, ValueError):
    pass


class InvalidProfileError(InvalidPotentialError):
    pass


class NumericalError(RingGasError, ArithmeticError):
    """Quadrature/root-finding failure."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({extra})"


class NoInteriorMinimumError(NumericalError):
    pass


class NotCriticalError(NumericalError):
    pass


class InconsistentCriticalityError(NumericalError):
    pass


class RegimeInapplicableError(NumericalError):
    pass


class NTooSmallError(NumericalError):
    pass
