"""Accuracy metrics for estimation traces."""

from typing import Optional

import numpy as np

from trafficobs_core.errors import EstimatorError
from trafficobs_core.models.results import EstimationTrace, PerformanceSummary


def per_component_rmse(trace: EstimationTrace) -> np.ndarray:
    """sqrt(mean_k e_i[k]^2) for every state component i."""
    if len(trace) == 0:
        raise EstimatorError("Cannot compute RMSE of an empty trace")
    return np.sqrt(np.mean(trace.errors**2, axis=0))


def rmse(trace: EstimationTrace) -> float:
    """Sum over components of the per-component RMS error.

    Examples:
        A constant error c on every one of n components gives n * c.
    """
    return float(np.sum(per_component_rmse(trace)))


def settle_step(series: np.ndarray, level: float) -> Optional[int]:
    """First k such that series[j] <= level for every j >= k, or None."""
    above = np.flatnonzero(np.asarray(series) > level)
    if above.size == 0:
        return 0
    last = int(above[-1])
    return None if last == len(series) - 1 else last + 1


def performance_norm(
    trace: EstimationTrace,
    Z: np.ndarray,
    mu: Optional[float],
    w_linf: Optional[float],
) -> PerformanceSummary:
    """Series ||Z e[k]||_2 checked against zeta = mu * ||w||_Linf.

    Args:
        trace: Estimation trace
        Z: Performance-output matrix
        mu: Performance level of the synthesized gain
        w_linf: Realized disturbance sup-norm

    Returns:
        PerformanceSummary

    Raises:
        EstimatorError: If the synthesis metadata is missing
    """
    if mu is None or w_linf is None:
        raise EstimatorError("Performance check needs the performance level and ||w||_Linf")
    series = np.linalg.norm(trace.errors @ np.atleast_2d(Z).T, axis=1)
    return PerformanceSummary(
        series=series,
        w_linf=float(w_linf),
        mu=float(mu),
        settle_step=settle_step(series, mu * w_linf),
    )
