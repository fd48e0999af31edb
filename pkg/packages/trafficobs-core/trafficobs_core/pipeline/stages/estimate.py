"""Estimation pipeline stage."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional, Sequence

import numpy as np

from trafficobs_core.errors import EstimatorError
from trafficobs_core.models.experiment import Experiment, ExperimentStatus
from trafficobs_core.models.results import EstimationTrace
from trafficobs_core.pipeline.base import PipelineStage
from trafficobs_core.processors.observer import LuenbergerObserver
from trafficobs_core.processors.ukf import UnscentedKalmanFilter

logger = logging.getLogger(__name__)

ESTIMATORS = ("observer", "ukf")


class EstimateStage(PipelineStage):
    """
    Run the estimators on the shared measurement stream.

    Input: experiment.plant, experiment.system, experiment.synthesis (observer only)
    Output: experiment.traces, experiment.failures
    """

    name = "estimate"

    def __init__(self, estimators: Sequence[str] = ESTIMATORS, parallel: bool = False):
        unknown = [e for e in estimators if e not in ESTIMATORS]
        if unknown:
            raise ValueError(f"Unknown estimators: {unknown}")
        self.estimators = tuple(estimators)
        self.parallel = parallel

    def validate(self, experiment: Experiment) -> tuple[bool, Optional[str]]:
        """Validate the plant run and, for the observer, the gain are available."""
        if experiment.plant is None or experiment.system is None:
            return False, "Experiment has no simulated plant"
        if "observer" in self.estimators and experiment.synthesis is None:
            return False, "The observer needs a synthesized gain"
        return True, None

    def pre_execute(self, experiment: Experiment) -> None:
        experiment.update_status(ExperimentStatus.ESTIMATING, progress=0)

    def _run_arm(self, experiment: Experiment, name: str) -> Optional[EstimationTrace]:
        scenario = experiment.scenario
        system = experiment.system
        plant = experiment.plant
        assert system is not None and plant is not None
        Z = scenario.synthesis.z_scale * np.eye(system.n_states)

        started = time.perf_counter()
        try:
            if name == "observer":
                assert experiment.synthesis is not None
                estimator: Any = LuenbergerObserver(system, experiment.synthesis)
            else:
                estimator = UnscentedKalmanFilter(system, scenario.ukf)
            trace = estimator.run(plant, scenario.initial_estimate, Z)
        except Exception as e:
            experiment.wall_times[name] = time.perf_counter() - started
            experiment.failures[name] = str(e)
            logger.error("Estimator %s failed: %s", name, e)
            return None
        experiment.add_trace(trace)
        return trace

    def execute(self, experiment: Experiment, **kwargs: Any) -> dict[str, EstimationTrace]:
        """
        Run every configured estimator.

        Returns:
            Traces by estimator name

        Raises:
            EstimatorError: If every estimator failed
        """
        if self.parallel and len(self.estimators) > 1:
            with ThreadPoolExecutor(max_workers=len(self.estimators)) as pool:
                list(pool.map(lambda name: self._run_arm(experiment, name), self.estimators))
        else:
            for name in self.estimators:
                self._run_arm(experiment, name)

        if not experiment.traces:
            details = "; ".join(f"{k}: {v}" for k, v in experiment.failures.items())
            raise EstimatorError(f"Every estimator failed ({details})")
        return dict(experiment.traces)

    def post_execute(self, experiment: Experiment, result: dict[str, EstimationTrace]) -> None:
        experiment.update_status(ExperimentStatus.ESTIMATING, progress=100)
