"""Luenberger-type observer with a synthesized L-infinity gain."""

import logging
from dataclasses import dataclass
from typing import Optional, Protocol, Union

import numpy as np

from trafficobs_core.errors import EstimatorError
from trafficobs_core.models.highway import ExogenousInput
from trafficobs_core.models.results import EstimationTrace, PlantRun, SynthesisResult
from trafficobs_core.utils.time import Stopwatch

logger = logging.getLogger(__name__)


class EstimatorModel(Protocol):
    """What an estimator needs from the plant model."""

    C: np.ndarray

    @property
    def n_states(self) -> int: ...

    @property
    def upper_bound(self) -> Optional[float]: ...

    def propagate(self, x: np.ndarray, inp: ExogenousInput) -> np.ndarray: ...

    def advance_columns(self, x: np.ndarray, u: np.ndarray, beta: np.ndarray) -> np.ndarray: ...


def clamp_estimate(x: np.ndarray, upper: Optional[float]) -> tuple[np.ndarray, bool]:
    """Clip an estimate to [0, upper]; reports whether anything moved."""
    if upper is None:
        return x, False
    clipped = np.clip(x, 0.0, upper)
    return clipped, bool(np.any(clipped != x))


@dataclass(eq=False)
class ObserverState:
    """Current estimate and the gain driving the correction."""

    xhat: np.ndarray
    L: np.ndarray
    clamped: bool = False


def observer_step(
    obs: ObserverState, y: np.ndarray, u: ExogenousInput, model: EstimatorModel
) -> ObserverState:
    """xhat+ = A xhat + f(xhat, u) + L (y - C xhat), clamped to the density box.

    Raises:
        EstimatorError: On dimension mismatch
    """
    n, p = model.n_states, model.C.shape[0]
    if obs.xhat.shape != (n,):
        raise EstimatorError(f"Estimate has shape {obs.xhat.shape}, expected ({n},)")
    if obs.L.shape != (n, p):
        raise EstimatorError(f"Gain has shape {obs.L.shape}, expected {(n, p)}")
    if np.shape(y) != (p,):
        raise EstimatorError(f"Measurement has shape {np.shape(y)}, expected ({p},)")

    innovation = y - model.C @ obs.xhat
    xhat, clamped = clamp_estimate(model.propagate(obs.xhat, u) + obs.L @ innovation,
                                   model.upper_bound)
    if clamped:
        logger.debug("Observer estimate clamped to the density box")
    return ObserverState(xhat=xhat, L=obs.L, clamped=clamped)


def build_trace(
    name: str,
    plant: PlantRun,
    estimates: np.ndarray,
    Z: np.ndarray,
    wall_time: float,
    clamp_steps: int = 0,
    repairs: int = 0,
) -> EstimationTrace:
    """Attach error and performance-output norms to an estimate sequence."""
    errors = plant.states - estimates
    return EstimationTrace(
        estimator=name,
        states=plant.states,
        estimates=estimates,
        measurements=plant.measurements,
        error_norms=np.linalg.norm(errors, axis=1),
        performance_norms=np.linalg.norm(errors @ Z.T, axis=1),
        wall_time=wall_time,
        clamp_steps=clamp_steps,
        repairs=repairs,
    )


class LuenbergerObserver:
    """Run the observer over a recorded measurement stream.

    Args:
        model: Plant model (SystemMatrices or any EstimatorModel)
        gain: Observer gain, or a synthesis result carrying one
    """

    name = "observer"

    def __init__(self, model: EstimatorModel, gain: Union[SynthesisResult, np.ndarray]):
        self.model = model
        self.gain = gain.L if isinstance(gain, SynthesisResult) else np.asarray(gain, dtype=float)
        expected = (model.n_states, model.C.shape[0])
        if self.gain.shape != expected:
            raise EstimatorError(
                f"Gain has shape {self.gain.shape}, but the system needs {expected}"
            )

    def run(self, plant: PlantRun, x0: np.ndarray, Z: np.ndarray) -> EstimationTrace:
        """Estimate the whole trajectory.

        Shapes are checked once; the loop steps (n, 1) columns through the raw input
        schedule.

        Args:
            plant: Ground truth and measurement stream
            x0: Initial estimate
            Z: Performance-output matrix

        Returns:
            EstimationTrace (wall-time covers the estimation loop only)

        Raises:
            EstimatorError: If x0 or the measurements do not fit the model
        """
        model = self.model
        n, p = model.n_states, model.C.shape[0]
        horizon = plant.horizon
        xhat = np.array(x0, dtype=float)
        if xhat.shape != (n,):
            raise EstimatorError(f"Initial estimate has shape {xhat.shape}, expected ({n},)")
        if plant.measurements.shape != (horizon, p):
            raise EstimatorError(
                f"Measurements have shape {plant.measurements.shape}, expected ({horizon}, {p})"
            )

        schedule = plant.schedule
        inputs = np.ascontiguousarray(schedule.u.T)
        measurements = np.ascontiguousarray(plant.measurements.T)
        beta = schedule.beta
        C, L, upper = model.C, self.gain, model.upper_bound
        advance = model.advance_columns

        estimates = np.empty_like(plant.states)
        estimates[0] = xhat
        column = xhat[:, None]
        clamp_steps = 0

        watch = Stopwatch()
        with watch:
            for k in range(horizon - 1):
                column = advance(column, inputs[:, k: k + 1], beta) + L @ (
                    measurements[:, k: k + 1] - C @ column
                )
                if upper is not None and (column.min() < 0.0 or column.max() > upper):
                    column = np.clip(column, 0.0, upper)
                    clamp_steps += 1
                estimates[k + 1] = column[:, 0]

        if clamp_steps:
            logger.warning("Observer estimate was clamped at %d of %d steps", clamp_steps,
                           horizon)
        return build_trace(self.name, plant, estimates, Z, watch.elapsed, clamp_steps)
