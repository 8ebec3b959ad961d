"""Exception hierarchy shared by every module."""


class WickBridgeError(Exception):
    """Base class for all library errors."""


class DomainError(WickBridgeError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class SingularityError(DomainError):
    """A kernel was evaluated at a point where it diverges (e.g. zero elapsed time)."""


class CausticError(SingularityError):
    """The harmonic quantum kernel was evaluated at a caustic, omega * t = n * pi."""


class UnsupportedSpecError(WickBridgeError, ValueError):
    """The system specification cannot be handled by the requested method."""


class GridMismatchError(WickBridgeError, ValueError):
    """Two objects that must share a grid (or time interval) do not."""


class DegenerateFieldError(WickBridgeError, ValueError):
    """A field carries too little mass for the requested statistic."""


class UsageError(WickBridgeError, ValueError):
    """Invalid request, such as an unknown scenario name."""
