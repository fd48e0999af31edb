"""Exception hierarchy for Traffic Observer Core."""

from typing import Optional


class TrafficObsError(Exception):
    """Base class for all toolkit errors."""


class ModelError(TrafficObsError):
    """Invalid highway model data or a density bound violated beyond round-off."""


class ScenarioError(TrafficObsError):
    """Malformed scenario file or an override that does not fit the schema."""


class SynthesisError(TrafficObsError):
    """Observer synthesis failed (solver error or failed certificate re-check)."""

    def __init__(self, message: str, status: Optional[str] = None):
        super().__init__(message)
        self.status = status


class InfeasibleSynthesisError(SynthesisError):
    """The solver or the phase-one program certified infeasibility.

    Attributes:
        certificate: Phase-one margin t* when that program decided, else None
    """

    def __init__(
        self, message: str, status: Optional[str] = None, certificate: Optional[float] = None
    ):
        super().__init__(message, status=status)
        self.certificate = certificate


class DetectabilityError(InfeasibleSynthesisError):
    """(A, C) has an unobservable mode on or outside the unit circle."""

    def __init__(self, message: str, eigenvalue: complex, rank_deficit: int):
        super().__init__(message, status="not_detectable")
        self.eigenvalue = eigenvalue
        self.rank_deficit = rank_deficit


class EstimatorError(TrafficObsError):
    """Estimator misuse or unrecoverable numerical breakdown."""


class DegenerateSplitWarning(UserWarning):
    """An off-ramp section has a zero split ratio."""
