"""Experiment entity tracked through the pipeline stages."""

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import TYPE_CHECKING, Any, Optional
from uuid import uuid4

from trafficobs_core.models.results import EstimationTrace, PlantRun, SynthesisResult
from trafficobs_core.models.scenario import Scenario

if TYPE_CHECKING:
    from trafficobs_core.processors.actm import SystemMatrices


class ExperimentStatus(str, Enum):
    """Status of an experiment."""

    PENDING = "pending"
    SIMULATING = "simulating"
    SYNTHESIZING = "synthesizing"
    ESTIMATING = "estimating"
    COMPLETED = "completed"
    FAILED = "failed"


def _now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass(eq=False)
class Experiment:
    """One run of a scenario, from plant simulation to estimator traces."""

    scenario: Scenario
    id: str = field(default_factory=lambda: str(uuid4()))
    status: ExperimentStatus = ExperimentStatus.PENDING
    progress: float = 0.0  # 0-100
    created_at: datetime = field(default_factory=_now)
    updated_at: datetime = field(default_factory=_now)
    error: Optional[str] = None

    system: Optional["SystemMatrices"] = None
    plant: Optional[PlantRun] = None
    synthesis: Optional[SynthesisResult] = None
    traces: dict[str, EstimationTrace] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)  # estimator -> message
    wall_times: dict[str, float] = field(default_factory=dict)  # stage or estimator -> seconds

    metadata: dict[str, Any] = field(default_factory=dict)

    def update_status(
        self,
        status: ExperimentStatus,
        progress: Optional[float] = None,
        error: Optional[str] = None,
    ) -> None:
        """Update status and optional progress."""
        self.status = status
        self.updated_at = _now()
        if progress is not None:
            self.progress = progress
        if error:
            self.error = error

    def add_trace(self, trace: EstimationTrace) -> None:
        self.traces[trace.estimator] = trace
        self.wall_times[trace.estimator] = trace.wall_time

    @property
    def is_complete(self) -> bool:
        return self.status == ExperimentStatus.COMPLETED

    @property
    def is_failed(self) -> bool:
        return self.status == ExperimentStatus.FAILED
