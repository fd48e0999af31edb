"""Observer gain synthesis pipeline stage."""

from typing import Any, Optional

from trafficobs_core.errors import SynthesisError
from trafficobs_core.models.experiment import Experiment, ExperimentStatus
from trafficobs_core.models.results import SynthesisResult
from trafficobs_core.pipeline.base import PipelineStage
from trafficobs_core.processors.lipschitz import check_lipschitz_level
from trafficobs_core.processors.synthesis import LmiSynthesizer


class SynthesizeStage(PipelineStage):
    """
    Synthesize the observer gain, or adopt a stored one.

    Input: experiment.system
    Output: experiment.synthesis
    """

    name = "synthesize"

    def __init__(
        self,
        synthesizer: Optional[LmiSynthesizer] = None,
        gain: Optional[SynthesisResult] = None,
    ):
        self.synthesizer = synthesizer
        self.gain = gain

    def validate(self, experiment: Experiment) -> tuple[bool, Optional[str]]:
        """Validate the system has been assembled."""
        if experiment.system is None:
            return False, "Experiment has no assembled system"
        return True, None

    def pre_execute(self, experiment: Experiment) -> None:
        experiment.update_status(ExperimentStatus.SYNTHESIZING)

    def execute(self, experiment: Experiment, **kwargs: Any) -> SynthesisResult:
        """
        Produce the gain for the experiment's system.

        Returns:
            SynthesisResult
        """
        system = experiment.system
        assert system is not None

        if self.gain is not None:
            expected = (system.n_states, system.n_outputs)
            if self.gain.L.shape != expected:
                raise SynthesisError(
                    f"Stored gain has shape {self.gain.L.shape}, the scenario needs {expected}"
                )
            if self.gain.sensors and tuple(self.gain.sensors) != tuple(system.sensors):
                raise SynthesisError("Stored gain was synthesized for another sensor layout")
            result = self.gain
        else:
            synthesizer = self.synthesizer or LmiSynthesizer(experiment.scenario.synthesis)
            result = synthesizer.synthesize(system)
            check_lipschitz_level(result, experiment.scenario)

        experiment.synthesis = result
        return result

    def post_execute(self, experiment: Experiment, result: SynthesisResult) -> None:
        experiment.metadata["mu"] = result.mu
        experiment.metadata["gain_reused"] = self.gain is not None
        experiment.metadata["gamma_hat"] = result.gamma_hat
        experiment.metadata["bound_certified"] = result.bound_certified
