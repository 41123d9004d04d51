"""Exception types raised by the integrators, diagnostics and harness."""


class KeplerError(Exception):
    """Base class for every error raised by this package."""


class SingularityError(KeplerError, ArithmeticError):
    """The position reached the attracting center (collision)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class DegenerateOrbitError(KeplerError, ValueError):
    """Radial or zero-momentum data for which an operation is undefined."""


class StepTooLargeError(KeplerError, ValueError):
    """Initial MTPI step violates |h0 p0 / m| < |r0|."""


class StepCollapseError(KeplerError, ArithmeticError):
    """The adaptive-step denominator collapsed (trajectory too close to the center)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class DomainError(KeplerError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ConvergenceError(KeplerError, RuntimeError):
    """An iterative procedure did not converge."""


class DegenerateReferenceError(KeplerError, ValueError):
    """A relative error metric was requested whose reference value is zero."""


class ConfigError(KeplerError, ValueError):
    """Invalid scenario or CLI configuration."""
