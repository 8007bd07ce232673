"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CarnotError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CarnotError, ValueError):
    """Invalid user input: bad shapes, non-finite values, malformed config."""


class AbnormalCovectorError(CarnotError, ValueError):
    """The zero covector was passed where a normal (nonzero) one is required.

    The support function is positively homogeneous and not differentiable at
    the origin, and the zero covector corresponds to the excluded abnormal
    case, so every operation on covectors rejects it.
    """


class UnsupportedRankError(CarnotError, ValueError):
    """An operation proven only for rank 3 was requested for another rank."""


class IntegrationError(CarnotError, RuntimeError):
    """The ODE solver failed to produce a trajectory."""


class DriftExceededError(IntegrationError):
    """A monitored invariant drifted beyond the configured bound.

    Carries the offending time, the observed drift, and the partial
    trajectory accumulated before the violation.
    """

    def __init__(self, message: str, time: float, drift: float, partial=None):
        super().__init__(message)
        self.time = time
        self.drift = drift
        self.partial = partial


class HorizonExhaustedError(IntegrationError):
    """No first return was found within the search horizon."""

    def __init__(self, message: str, t_max: float):
        super().__init__(message)
        self.t_max = t_max
