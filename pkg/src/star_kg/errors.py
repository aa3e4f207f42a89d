"""Exception and warning types raised across the package."""


class StarGraphError(Exception):
    """Base class for all package errors."""


class NetworkError(StarGraphError, ValueError):
    pass


class NonPositiveSpeed(NetworkError):
    pass


class UnsortedPotentials(NetworkError):
    pass


class TooFewBranches(NetworkError):
    pass


class NonIntegrable(StarGraphError, ValueError):
    """Function has neither a support bound nor a decay certificate."""


class MissingDerivativeRule(StarGraphError, ValueError):
    pass


class ThresholdSingularity(StarGraphError, ValueError):
    """A quantity with a pole at a potential value a_k was requested there."""


class WronskianZero(StarGraphError, ZeroDivisionError):
    pass


class SpectrumPoint(StarGraphError, ValueError):
    """Real spectral parameter passed where a resolvent-set point is needed."""


class NonCompactSupport(StarGraphError, ValueError):
    pass


class SingularD(StarGraphError, ValueError):
    pass


class PreconditionError(StarGraphError, ValueError):
    pass


class ToleranceNotMet(StarGraphError, RuntimeError):
    pass


class BadGrid(StarGraphError, ValueError):
    pass


class SingularSystem(StarGraphError, RuntimeError):
    pass


class BoundaryContamination(StarGraphError, ValueError):
    """Signal would reach the truncation boundary of a finite-difference star."""


class BandOutsideGap(StarGraphError, ValueError):
    pass


class AmplitudeUnderflow(StarGraphError, RuntimeError):
    pass


class ConfigError(StarGraphError, ValueError):
    pass


class CheckFailure(StarGraphError, RuntimeError):
    pass


class NonConformingInitialData(UserWarning):
    """Initial displacement violates the vertex conditions; energy checks are skipped."""
