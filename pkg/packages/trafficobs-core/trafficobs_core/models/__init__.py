"""Data models for Traffic Observer Core."""

from trafficobs_core.models.config import (
    DisturbanceConfig,
    InputConfig,
    LinearPart,
    NoiseConfig,
    ObserverConfig,
    SolverName,
    SynthesisConfig,
    UkfConfig,
)
from trafficobs_core.models.experiment import Experiment, ExperimentStatus
from trafficobs_core.models.highway import (
    ExogenousInput,
    FundamentalDiagram,
    HighwayTopology,
    InputSchedule,
    TrafficState,
)
from trafficobs_core.models.results import (
    EstimationTrace,
    ExperimentReport,
    LipschitzEstimate,
    PerformanceSummary,
    PlantRun,
    ReplicationSummary,
    SweepRow,
    SynthesisResult,
)
from trafficobs_core.models.scenario import Scenario

__all__ = [
    "FundamentalDiagram",
    "HighwayTopology",
    "TrafficState",
    "ExogenousInput",
    "InputSchedule",
    "Scenario",
    "Experiment",
    "ExperimentStatus",
    "LinearPart",
    "SolverName",
    "DisturbanceConfig",
    "NoiseConfig",
    "InputConfig",
    "SynthesisConfig",
    "UkfConfig",
    "ObserverConfig",
    "SweepRow",
    "SynthesisResult",
    "PlantRun",
    "EstimationTrace",
    "PerformanceSummary",
    "ExperimentReport",
    "LipschitzEstimate",
    "ReplicationSummary",
]
