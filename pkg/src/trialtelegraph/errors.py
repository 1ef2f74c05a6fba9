"""Exception types shared across the package."""


class TrialTelegraphError(Exception):
    """Base class for all package errors."""


class ParameterError(TrialTelegraphError, ValueError):
    """A parameter violates its domain (rates, probabilities, supports)."""


class RangeOverflowError(TrialTelegraphError, OverflowError):
    """A finite quantity left the representable floating-point range."""


class SeriesTruncationError(TrialTelegraphError, RuntimeError):
    """A series did not converge within the allowed number of terms.

    Carries the last relative increment actually achieved so callers can
    decide whether the partial answer is usable.
    """

    def __init__(self, message, achieved=None, max_terms=None):
        super().__init__(message)
        self.achieved = achieved
        self.max_terms = max_terms


class NoStationaryLawError(ParameterError):
    """Raised when a stationary density is requested but none exists."""


class SimulationLimitError(TrialTelegraphError, RuntimeError):
    """A sample path exceeded the hard cap on velocity switches."""
