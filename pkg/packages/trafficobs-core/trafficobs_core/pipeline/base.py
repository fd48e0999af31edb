"""Base pipeline and stage abstractions."""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from trafficobs_core.models.experiment import Experiment, ExperimentStatus

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    """Result of a pipeline execution."""

    success: bool
    experiment: Experiment
    stage_results: dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    exception: Optional[BaseException] = None


class PipelineStage(ABC):
    """
    Abstract base class for pipeline stages.

    Each stage fills in one part of an experiment: plant run, gain or traces.
    """

    name: str = "base_stage"

    @abstractmethod
    def execute(self, experiment: Experiment, **kwargs: Any) -> Any:
        """
        Execute the stage logic.

        Args:
            experiment: The experiment to advance
            **kwargs: Additional stage-specific parameters

        Returns:
            Stage-specific result data
        """

    @abstractmethod
    def validate(self, experiment: Experiment) -> tuple[bool, Optional[str]]:
        """
        Validate that the experiment is ready for this stage.

        Returns:
            Tuple of (is_valid, error_message)
        """

    def pre_execute(self, experiment: Experiment) -> None:
        """Hook called before execution."""

    def post_execute(self, experiment: Experiment, result: Any) -> None:
        """Hook called after execution."""


class Pipeline:
    """
    Orchestrate multiple pipeline stages.

    Stages are executed in order. Failed stages stop execution.
    """

    def __init__(
        self,
        stages: list[PipelineStage],
        progress_callback: Optional[Callable[[str, float, str], None]] = None,
    ):
        self.stages = stages
        self.progress_callback = progress_callback

    def execute(
        self,
        experiment: Experiment,
        **kwargs: Any,
    ) -> PipelineResult:
        """
        Execute the pipeline for an experiment.

        Args:
            experiment: The experiment to run
            **kwargs: Additional parameters passed to all stages

        Returns:
            PipelineResult with execution details
        """
        result = PipelineResult(success=True, experiment=experiment)

        for position, stage in enumerate(self.stages):
            valid, error = stage.validate(experiment)
            if not valid:
                result.success = False
                result.error = f"Stage '{stage.name}' validation failed: {error}"
                experiment.update_status(ExperimentStatus.FAILED, error=result.error)
                return result

            started = time.perf_counter()
            try:
                stage.pre_execute(experiment)
                stage_result = stage.execute(experiment, **kwargs)
                result.stage_results[stage.name] = stage_result
                stage.post_execute(experiment, stage_result)
            except Exception as e:
                experiment.wall_times[f"stage:{stage.name}"] = time.perf_counter() - started
                result.success = False
                result.error = f"Stage '{stage.name}' failed: {e}"
                result.exception = e
                experiment.update_status(ExperimentStatus.FAILED, error=str(e))
                logger.debug("Stage %s failed", stage.name, exc_info=True)
                return result

            experiment.wall_times[f"stage:{stage.name}"] = time.perf_counter() - started
            logger.info("Stage %s finished in %.2fs", stage.name,
                        experiment.wall_times[f"stage:{stage.name}"])

            if self.progress_callback:
                overall_progress = (position + 1) / len(self.stages) * 100
                self.progress_callback(stage.name, overall_progress, "")

        return result
