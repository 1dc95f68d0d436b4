"""Errors and warnings raised by kinfront.

The errors subclass the matching builtin so ``except ValueError`` style code
keeps working.
"""


class KinfrontError(Exception):
    """Base class for every error raised by kinfront."""


class InvalidParameterError(KinfrontError, ValueError):
    """A precondition on the inputs failed (negative time, γ < 1, ...)."""


class NotInZoneError(InvalidParameterError):
    """The phase point lies outside the zone where the Freidlin check applies."""


class NumericalError(KinfrontError, ArithmeticError):
    """A computation could not produce a meaningful number."""


class NoTrajectoryError(NumericalError):
    """No finite-cost trajectory reaches the requested phase point."""


class NoFrontError(NumericalError):
    """The rate function has no nonpositive level set to track."""


class DegenerateFitError(NumericalError):
    """A power-law fit was asked for data it cannot be fit on."""


class InvariantViolation(KinfrontError, AssertionError):
    """A hard invariant failed at runtime."""


class MaxPrincipleViolation(InvariantViolation):
    """The kinetic density left the band 0 <= f <= sqrt(eps) M_eps."""


class BoundsViolation(InvariantViolation):
    """A spreading rate fell outside its known lower and upper bounds."""


class TruncationWarning(UserWarning):
    """A finite grid or quadrature cut off part of the answer."""


class AccuracyWarning(UserWarning):
    """The discretisation is stable but too coarse to be accurate."""


class InsufficientSamplesWarning(UserWarning):
    """Some histogram bins held too few samples and were dropped."""
