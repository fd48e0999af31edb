"""Pipeline stages."""

from trafficobs_core.pipeline.stages.estimate import EstimateStage
from trafficobs_core.pipeline.stages.simulate import SimulateStage
from trafficobs_core.pipeline.stages.synthesize import SynthesizeStage

__all__ = [
    "SimulateStage",
    "SynthesizeStage",
    "EstimateStage",
]
