"""Pipeline orchestration for estimation experiments."""

from trafficobs_core.pipeline.base import Pipeline, PipelineResult, PipelineStage
from trafficobs_core.pipeline.experiment import ExperimentPipeline, run_experiment, run_replications
from trafficobs_core.pipeline.stages.estimate import EstimateStage
from trafficobs_core.pipeline.stages.simulate import SimulateStage
from trafficobs_core.pipeline.stages.synthesize import SynthesizeStage

__all__ = [
    "Pipeline",
    "PipelineResult",
    "PipelineStage",
    "ExperimentPipeline",
    "SimulateStage",
    "SynthesizeStage",
    "EstimateStage",
    "run_experiment",
    "run_replications",
]
