"""Exception types shared across the package."""


class ArcError(Exception):
    """Base class for all errors raised by this package."""


class GameSpecError(ArcError):
    """Malformed game description (bad shapes, non-finite payoffs, bad JSON)."""


class SamplingError(ArcError):
    """Type sampling failed, e.g. the rejection budget was exhausted."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts


class NotIrreducibleError(ArcError):
    """The thresholded transition chain has more than one closed class.

    Signals that no unique stationary distribution exists at this alpha,
    which is the sweep's stopping condition.
    """


class SolverFailureError(ArcError):
    """The stationary solve finished but its residual exceeds tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SweepError(ArcError):
    """The alpha sweep could not produce a distribution."""
