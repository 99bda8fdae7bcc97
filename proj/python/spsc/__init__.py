"""Single-photon source characterisation: Monte Carlo, correlation and fitting."""

from ._core import *  # noqa: F401,F403
from ._core import ComputationError, FormatError, Histogram, FitResult

__all__ = [name for name in dir() if not name.startswith("_")]
