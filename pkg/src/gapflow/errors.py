"""Exception types raised across the package."""


class GapflowError(Exception):
    """Base class for all package errors."""


class SpectralDensityError(GapflowError, ValueError):
    """Invalid spectral-density parameters or evaluation domain."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class QuadratureError(GapflowError, RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available estimate and its error bound so callers
    can decide whether the value is still usable.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class MomentDivergenceError(GapflowError, ArithmeticError):
    """A frequency moment of the spectral density does not converge."""

    def __init__(self, message, moment=None):
        super().__init__(message)
        self.moment = moment


class UnresolvedRegimeError(GapflowError, LookupError):
    """An asymptotic regime needs expansion terms that are not available."""


class DegenerateSampleError(GapflowError, ValueError):
    """Amplitude-phase form requested where both transforms vanish."""


class DomainError(GapflowError, ValueError):
    """Argument outside the domain where a formula is defined."""
