"""Unscented Kalman filter baseline with additive noise and linear measurements."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from trafficobs_core.errors import EstimatorError
from trafficobs_core.models.config import UkfConfig
from trafficobs_core.models.highway import ExogenousInput
from trafficobs_core.models.results import EstimationTrace, PlantRun
from trafficobs_core.processors.observer import EstimatorModel, build_trace, clamp_estimate
from trafficobs_core.utils.linalg import floor_eigenvalues, symmetrize
from trafficobs_core.utils.time import Stopwatch

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class UkfState:
    """Mean, covariance and the constants of the filter."""

    xhat: np.ndarray
    P_cov: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    ut_params: tuple[float, float, float]  # (alpha, beta, kappa)
    eig_floor: float = 1e-12
    repaired: bool = False
    clamped: bool = False

    @classmethod
    def initial(cls, x0: np.ndarray, config: UkfConfig, n_outputs: int) -> "UkfState":
        n = len(x0)
        return cls(
            xhat=np.asarray(x0, dtype=float).copy(),
            P_cov=config.p0 * np.eye(n),
            Q=config.q * np.eye(n),
            R=config.r * np.eye(n_outputs),
            ut_params=(config.alpha, config.beta, config.kappa),
            eig_floor=config.eig_floor,
        )


def sigma_weights(
    n: int, alpha: float, beta: float, kappa: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Mean and covariance weights of the scaled unscented transform.

    Returns:
        (weights_mean, weights_cov, lam) with lam = alpha^2 (n + kappa) - n

    Raises:
        EstimatorError: If n + lam is not positive
    """
    lam = alpha * alpha * (n + kappa) - n
    c = n + lam
    if c <= 0:
        raise EstimatorError(
            f"Sigma-point spread n + lambda = {c:.6g} must be positive (n={n}, kappa={kappa})"
        )
    weights_mean = np.full(2 * n + 1, 0.5 / c)
    weights_mean[0] = lam / c
    weights_cov = weights_mean.copy()
    weights_cov[0] = lam / c + (1 - alpha * alpha + beta)
    return weights_mean, weights_cov, lam


def _cholesky(P: np.ndarray, floor: float) -> tuple[np.ndarray, np.ndarray, bool]:
    """Lower Cholesky factor, repairing the matrix by eigenvalue flooring if needed."""
    try:
        return linalg.cholesky(P, lower=True), P, False
    except linalg.LinAlgError:
        pass
    repaired = floor_eigenvalues(P, floor)
    logger.debug("Covariance was not positive definite; eigenvalues floored at %.1e", floor)
    try:
        return linalg.cholesky(repaired, lower=True), repaired, True
    except linalg.LinAlgError as e:
        raise EstimatorError(f"Covariance could not be repaired: {e}") from e


def sigma_points(
    xhat: np.ndarray, P_cov: np.ndarray, lam: float, floor: float = 1e-12
) -> tuple[np.ndarray, bool]:
    """Columns xhat, xhat + sqrt(n + lam) S_i, xhat - sqrt(n + lam) S_i.

    Returns:
        (points of shape (n, 2n + 1), whether the covariance had to be repaired)
    """
    n = len(xhat)
    root, _, repaired = _cholesky(P_cov, floor)
    spread = np.sqrt(n + lam) * root
    points = np.tile(xhat[:, None], (1, 2 * n + 1))
    points[:, 1: n + 1] += spread
    points[:, n + 1:] -= spread
    return points, repaired


def ukf_step(
    ukf: UkfState, y: np.ndarray, u: ExogenousInput, model: EstimatorModel
) -> UkfState:
    """Predict through the nonlinear step map, then correct with y = C x + v.

    Args:
        ukf: Filter state at step k
        y: Measurement at step k + 1
        u: Input applied between k and k + 1
        model: Plant model

    Returns:
        Filter state at step k + 1
    """
    n = model.n_states
    C = model.C
    if ukf.xhat.shape != (n,) or ukf.P_cov.shape != (n, n):
        raise EstimatorError(f"Filter state does not match a model with {n} states")
    if np.shape(y) != (C.shape[0],):
        raise EstimatorError(f"Measurement has shape {np.shape(y)}, expected ({C.shape[0]},)")

    alpha, beta, kappa = ukf.ut_params
    weights_mean, weights_cov, lam = sigma_weights(n, alpha, beta, kappa)

    points, repaired = sigma_points(ukf.xhat, ukf.P_cov, lam, ukf.eig_floor)
    if model.upper_bound is not None:
        points = np.clip(points, 0.0, model.upper_bound)

    predicted = model.propagate(points, u)
    mean = predicted @ weights_mean
    spread = predicted - mean[:, None]
    P_pred = symmetrize((spread * weights_cov) @ spread.T + ukf.Q)

    S = symmetrize(C @ P_pred @ C.T + ukf.R)
    cross = P_pred @ C.T
    try:
        gain = linalg.solve(S, cross.T, assume_a="pos").T
    except linalg.LinAlgError as e:
        raise EstimatorError(f"Innovation covariance is singular: {e}") from e

    xhat = mean + gain @ (y - C @ mean)
    P_cov = symmetrize(P_pred - gain @ S @ gain.T)
    xhat, clamped = clamp_estimate(xhat, model.upper_bound)

    return UkfState(
        xhat=xhat,
        P_cov=P_cov,
        Q=ukf.Q,
        R=ukf.R,
        ut_params=ukf.ut_params,
        eig_floor=ukf.eig_floor,
        repaired=repaired,
        clamped=clamped,
    )


class UnscentedKalmanFilter:
    """Run the unscented filter over a recorded measurement stream.

    Args:
        model: Plant model (SystemMatrices or any EstimatorModel)
        config: Unscented-transform constants and noise covariances
    """

    name = "ukf"

    def __init__(self, model: EstimatorModel, config: Optional[UkfConfig] = None):
        self.model = model
        self.config = config or UkfConfig()
        # Fail before the run if the constants cannot spread sigma points
        sigma_weights(model.n_states, self.config.alpha, self.config.beta, self.config.kappa)

    def run(self, plant: PlantRun, x0: np.ndarray, Z: np.ndarray) -> EstimationTrace:
        """Estimate the whole trajectory.

        The estimate at step k + 1 uses the measurement y[k + 1]; xhat[0] is the prior mean.
        """
        inputs = list(plant.schedule)
        horizon = plant.horizon
        estimates = np.empty_like(plant.states)
        state = UkfState.initial(x0, self.config, self.model.C.shape[0])
        estimates[0] = state.xhat
        repairs = clamp_steps = 0

        watch = Stopwatch()
        with watch:
            for k in range(horizon - 1):
                state = ukf_step(state, plant.measurements[k + 1], inputs[k], self.model)
                estimates[k + 1] = state.xhat
                repairs += state.repaired
                clamp_steps += state.clamped

        if repairs:
            logger.warning("Unscented filter covariance repaired at %d of %d steps", repairs,
                           horizon)
        return build_trace(self.name, plant, estimates, Z, watch.elapsed, clamp_steps, repairs)
