"""Exception types raised by the package."""


class FaradaySqueezingError(Exception):
    """Base class for all package errors."""


class DomainError(FaradaySqueezingError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class GammaPZero(DomainError):
    """Optical pumping rate is zero, so no polarized cw steady state exists."""


class NonPositiveVariance(DomainError):
    pass


class RegimeError(DomainError):
    """Asymptotic formula requested outside its regime of validity."""


class ConvergenceError(FaradaySqueezingError, RuntimeError):
    pass


class SingularMatrix(FaradaySqueezingError, ArithmeticError):
    """``i*omega - D`` is singular (undamped resonance)."""


class StepTooLarge(DomainError):
    pass


class UnstableStep(DomainError):
    """Explicit Euler step is outside the stability region of the drift."""


class SeriesTooShort(DomainError):
    pass


class CalibrationError(FaradaySqueezingError, RuntimeError):
    """Spectral estimator failed its white-noise self test."""
