"""Errors and warnings raised by ksdiff."""


class KsdiffError(Exception):
    """Base class for all ksdiff errors."""


class ParameterError(KsdiffError, ValueError):
    """A parameter or argument violates an invariant."""


class PoleError(ParameterError):
    """The argument is a pole of the gamma function."""


class ZeroOfGError(ParameterError):
    """The argument is a zero of the double gamma function."""


class DomainError(ParameterError):
    """The argument lies outside the domain of the requested representation."""


class UnsupportedRegionError(ParameterError):
    """No evaluation regime covers the requested argument."""


class DegenerateRootsError(ParameterError):
    """The telegraph characteristic polynomial has a double root."""


class KindMismatchError(ParameterError):
    """Spectral coefficients of the wrong kind were passed to a solver."""


class ConvergenceError(KsdiffError, ArithmeticError):
    """A series, limit or contour tail failed to converge to tolerance."""


class StepBudgetError(ConvergenceError):
    """A simulated path did not finish within its step budget."""


class QuadratureError(ConvergenceError):
    """A quadrature produced non-finite values."""


class CoefficientOverflowError(KsdiffError, OverflowError):
    """A coefficient is too large to leave log space."""


class ReflectionError(KsdiffError, RuntimeError):
    """A reflected Euler-Maruyama step could not be brought back into the domain."""


class TruncationWarning(UserWarning):
    """A series tail bound exceeds the requested tolerance."""


class GridWarning(UserWarning):
    """A grid is too coarse for the requested tolerance."""


class SmallTimeWarning(UserWarning):
    """A series was evaluated below its reliable small-time limit."""
