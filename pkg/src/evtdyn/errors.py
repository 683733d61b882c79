"""Exception hierarchy shared across the package."""


class EvtdynError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EvtdynError):
    """A system / noise / run parameter is outside its admissible domain."""


class DivergenceError(EvtdynError):
    """An orbit left the admissible region (escape to infinity, NaN state).

    Carries the step index at which divergence was detected.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class SingularObservationError(EvtdynError):
    """A distance observable was evaluated exactly at its singularity.

    Carries the offending time index when raised from a series evaluation.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class FitError(EvtdynError):
    """Parameter estimation failed to converge.

    ``best`` holds the best iterate found, when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateSampleError(EvtdynError):
    """The sample carries no usable information (constant data, lambda2 <= 0, ...)."""


class EstimatorDegenerateError(EvtdynError):
    """A closed-form estimator hit a degenerate denominator."""


class UnsupportedOperationError(EvtdynError):
    """The requested operation is not defined for this system."""


class InversionError(EvtdynError):
    """A fit-to-dimension inversion received values outside the invertible range."""
