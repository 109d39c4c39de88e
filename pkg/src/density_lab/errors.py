"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError` so the
CLI can map it to exit status 2 in one place.
"""

from __future__ import annotations


class DensityLabError(Exception):
    """Base class for all package errors."""


class ValidationError(DensityLabError, ValueError):
    """Input violates a documented precondition."""


class HorizonExceeded(ValidationError):
    """Evaluation requested beyond the range where an oracle is trustworthy."""


class InvalidWindow(ValidationError):
    """A window (a, b] with a >= b, or a negative left end."""


class InvalidK(ValidationError):
    pass


class InvalidEta(ValidationError):
    pass


class ParamError(ValidationError):
    """Covering parameters outside 0 < xi < eta < 1, x > 0."""


class NotACovering(ValidationError):
    pass


class ThresholdUnmet(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class TooFewWitnesses(ValidationError):
    pass


class NoStoppingIndex(ValidationError):
    """The ceiling recursion reached a fixed point above xi * x."""


class ConsequenceViolation(DensityLabError):
    """An exact identity that must hold failed; indicates a bug, not bad input."""
