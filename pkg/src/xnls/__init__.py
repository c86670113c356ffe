"""Spectral laboratory for the critical 2-D NLS with exponential
nonlinearity: splitting integrator, conservation and virial
diagnostics, Orlicz/Moser machinery, rearrangement, and the
space-time-norm post-processing."""

__version__ = "1.0.0"

from .errors import (
    BoundaryPollutionError,
    BracketFailureError,
    ConfigError,
    OverflowGuardError,
    XnlsError,
)
from .grid import Field2D, GridSpec, free_propagate
from .evolution import SimConfig, evolve

__all__ = [
    "BoundaryPollutionError",
    "BracketFailureError",
    "ConfigError",
    "OverflowGuardError",
    "XnlsError",
    "Field2D",
    "GridSpec",
    "SimConfig",
    "evolve",
    "free_propagate",
    "__version__",
]
