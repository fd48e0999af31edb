"""Utility functions for linear algebra and timing."""

from trafficobs_core.utils.linalg import floor_eigenvalues, smat, svec, symmetrize
from trafficobs_core.utils.time import Stopwatch, format_duration

__all__ = [
    "symmetrize",
    "svec",
    "smat",
    "floor_eigenvalues",
    "format_duration",
    "Stopwatch",
]
