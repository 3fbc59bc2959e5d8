"""Exception hierarchy for the tricycle package."""


class TricycleError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TricycleError, ValueError):
    """An argument lies outside the domain of the function."""


class HermiticityError(TricycleError):
    """A trace pairing produced a non-negligible imaginary part."""


class DegenerateSpectrumError(TricycleError):
    """The generator does not have a simple, gapped stationary eigenvalue."""


class NonThermalStateError(TricycleError):
    """The populations cannot be assigned a positive effective temperature."""


class QuadratureError(TricycleError):
    """Non-finite integrand samples or a negative length integrand."""


class ConsistencyError(TricycleError):
    """Two independent computation routes of the same quantity disagree."""


class InfeasibleError(TricycleError):
    """No admissible positive duration solves the requested allocation."""

    def __init__(self, message, discriminant=None):
        super().__init__(message)
        self.discriminant = discriminant


class IntegratorError(TricycleError):
    """The master-equation integrator left the set of physical states."""
