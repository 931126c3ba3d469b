"""Exception types shared across smoothlab."""


class SmoothlabError(Exception):
    """Base class for all library errors."""


class UsageError(SmoothlabError, ValueError):
    """Argument outside the documented domain (CLI exit code 2)."""


class OutOfRangeError(SmoothlabError, IndexError):
    """Query beyond what a precomputed table covers."""


class SolverError(SmoothlabError, RuntimeError):
    """Numerical solver failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class InfeasibleExactError(SmoothlabError, RuntimeError):
    """Exact enumeration would exceed the configured work cap."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound
