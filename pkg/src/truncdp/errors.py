"""Exception hierarchy for truncdp.

Every error raised by this package derives from TruncDpError, so callers can
catch one type at an API boundary. Subclasses are semantic: they say *what*
went wrong, not which module noticed it.
"""


class TruncDpError(Exception):
    """Base class for all truncdp errors."""


class InvalidParams(TruncDpError, ValueError):
    """A parameter fails validation (non-finite, wrong sign, empty interval...)."""


class DegenerateMass(TruncDpError):
    """The truncation interval carries less probability mass than the floor (1e-300).

    Nothing downstream of such a distribution is numerically meaningful, so we
    refuse to construct it rather than return garbage.
    """


class AttemptsExceeded(TruncDpError):
    """Rejection sampling hit the per-release attempt cap before accepting."""

    def __init__(self, message: str, attempts: int = 0):
        super().__init__(message)
        self.attempts = attempts


class EmptyCurve(TruncDpError):
    """An operation needs at least one (alpha, rdp) point and got none."""


class MismatchedGrids(TruncDpError):
    """Two RDP curves were combined pointwise but their alpha grids differ."""


class NoConvergence(TruncDpError):
    """An iterative routine (quadrature, bisection) exhausted its budget."""


class Unachievable(TruncDpError):
    """No parameter inside the search bracket meets the calibration target."""

    def __init__(self, message: str, best_epsilon: float | None = None):
        super().__init__(message)
        self.best_epsilon = best_epsilon
