"""Exception types shared across the package."""


class XnlsError(Exception):
    """Base class for all package errors."""


class OverflowGuardError(XnlsError):
    """The exponent cap (4*pi*|u|^2 <= 700) was exceeded.

    Raised instead of clamping: a silently capped value would corrupt
    conservation checks.  ``where`` carries the offending cell index when
    the failure happened on a grid field.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class BracketFailureError(XnlsError):
    """A root bracket for the Luxemburg norm bisection could not be found."""


class BoundaryPollutionError(XnlsError):
    """Too much mass reached the torus boundary; the run no longer
    approximates the whole plane."""


class ConfigError(XnlsError):
    """Invalid or unknown experiment configuration."""
