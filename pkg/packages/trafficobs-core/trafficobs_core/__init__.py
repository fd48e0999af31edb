"""
Traffic Observer Core

Pure Python library for ramp-aware highway density estimation:
asymmetric cell transmission model, L-infinity observer synthesis and
an unscented Kalman filter baseline.
No CLI - just the core logic.
"""

from trafficobs_core.errors import (
    DegenerateSplitWarning,
    DetectabilityError,
    EstimatorError,
    InfeasibleSynthesisError,
    ModelError,
    ScenarioError,
    SynthesisError,
    TrafficObsError,
)
from trafficobs_core.io.reports import (
    read_experiment_report,
    read_synthesis_report,
    write_experiment_report,
    write_figure_series,
    write_synthesis_report,
    write_trace_csv,
)
from trafficobs_core.io.scenario_file import bundled_scenarios, load_scenario
from trafficobs_core.models.config import (
    InputConfig,
    LinearPart,
    NoiseConfig,
    ObserverConfig,
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
    PlantRun,
    ReplicationSummary,
    SynthesisResult,
)
from trafficobs_core.models.scenario import Scenario
from trafficobs_core.pipeline.base import Pipeline, PipelineResult
from trafficobs_core.pipeline.experiment import (
    ExperimentPipeline,
    run_experiment,
    run_replications,
)
from trafficobs_core.processors.actm import ActmModel, SystemMatrices, assemble_system
from trafficobs_core.processors.lipschitz import estimate_lipschitz
from trafficobs_core.processors.observer import LuenbergerObserver
from trafficobs_core.processors.synthesis import LmiSynthesizer, SynthesisProblem
from trafficobs_core.processors.ukf import UnscentedKalmanFilter

__version__ = "0.1.0"

__all__ = [
    # Errors
    "TrafficObsError",
    "ModelError",
    "ScenarioError",
    "SynthesisError",
    "InfeasibleSynthesisError",
    "DetectabilityError",
    "EstimatorError",
    "DegenerateSplitWarning",
    # Models
    "FundamentalDiagram",
    "HighwayTopology",
    "TrafficState",
    "ExogenousInput",
    "InputSchedule",
    "Scenario",
    "Experiment",
    "ExperimentStatus",
    "LinearPart",
    "InputConfig",
    "NoiseConfig",
    "SynthesisConfig",
    "UkfConfig",
    "ObserverConfig",
    "PlantRun",
    "SynthesisResult",
    "EstimationTrace",
    "ExperimentReport",
    "LipschitzEstimate",
    "ReplicationSummary",
    # Pipeline
    "Pipeline",
    "PipelineResult",
    "ExperimentPipeline",
    "run_experiment",
    "run_replications",
    # Processors
    "ActmModel",
    "SystemMatrices",
    "assemble_system",
    "estimate_lipschitz",
    "SynthesisProblem",
    "LmiSynthesizer",
    "LuenbergerObserver",
    "UnscentedKalmanFilter",
    # IO
    "load_scenario",
    "bundled_scenarios",
    "write_synthesis_report",
    "read_synthesis_report",
    "write_trace_csv",
    "write_experiment_report",
    "read_experiment_report",
    "write_figure_series",
]
