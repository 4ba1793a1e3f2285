"""Typed errors raised by dikinlab.

Every numeric failure derives from :class:`NumericError` so the CLI can map
it to exit status 1 in one place.
"""


class NumericError(Exception):
    """Base class for all numeric failures."""


class IllConditioned(NumericError):
    pass


class NoConvergence(NumericError):
    pass


class PreconditionViolated(NumericError, ValueError):
    pass


class DegenerateStep(NumericError):
    """The Dikin step annihilated a coordinate (theta == 1)."""


class DegenerateInput(NumericError, ZeroDivisionError):
    pass


class NotApplicable(NumericError):
    """The requested construction does not apply for this parameter."""


class BracketError(NumericError):
    pass


class ClaimViolated(NumericError):
    """An analytic claim failed its numerical check."""


class NonInterior(NumericError):
    pass


class MaxIters(NumericError):
    pass


class NoInteriorFound(NumericError):
    pass


class NotFound(NumericError):
    pass
