"""Plant simulation pipeline stage."""

from typing import Any, Optional

import numpy as np

from trafficobs_core.models.experiment import Experiment, ExperimentStatus
from trafficobs_core.models.results import PlantRun
from trafficobs_core.pipeline.base import PipelineStage
from trafficobs_core.processors.actm import assemble_system
from trafficobs_core.processors.harness import resolve_initial_state, simulate_plant


class SimulateStage(PipelineStage):
    """
    Assemble the highway system and simulate the true trajectory.

    Input: experiment.scenario
    Output: experiment.system, experiment.plant
    """

    name = "simulate"

    def validate(self, experiment: Experiment) -> tuple[bool, Optional[str]]:
        """Validate the scenario has sensors to measure with."""
        if not experiment.scenario.topo.sensors:
            return False, "Scenario has no sensors"
        return True, None

    def pre_execute(self, experiment: Experiment) -> None:
        experiment.update_status(ExperimentStatus.SIMULATING, progress=0)

    def execute(
        self, experiment: Experiment, x0: Optional[np.ndarray] = None, **kwargs: Any
    ) -> PlantRun:
        """
        Simulate the plant and the noisy measurement stream.

        Args:
            experiment: Experiment to fill in
            x0: Optional true initial densities (random from the seed otherwise)

        Returns:
            PlantRun
        """
        scenario = experiment.scenario
        system = assemble_system(
            scenario.topo,
            scenario.fd,
            scenario.noise.disturbance,
            scenario.synthesis.linear_part,
            beta=scenario.beta,
        )
        start = resolve_initial_state(scenario.topo, scenario.fd, scenario.seed, x0)
        plant = simulate_plant(
            system.model, scenario.input_schedule, start, system.C, scenario.noise, scenario.seed
        )
        experiment.system = system
        experiment.plant = plant
        return plant

    def post_execute(self, experiment: Experiment, result: PlantRun) -> None:
        experiment.metadata["digest"] = result.digest
        experiment.update_status(ExperimentStatus.SIMULATING, progress=100)
