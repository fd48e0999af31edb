"""Result models produced by synthesis, estimation and experiments."""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from trafficobs_core.models.highway import InputSchedule


@dataclass
class SweepRow:
    """One grid point of an alpha sweep."""

    alpha: float
    status: str
    mu: Optional[float] = None
    solve_time: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.mu is not None


@dataclass(eq=False)
class SynthesisResult:
    """Observer gain together with its certificate."""

    L: np.ndarray  # gain, (n, p)
    P: np.ndarray  # Lyapunov certificate, (n, n)
    Y: np.ndarray  # P L, (n, p)
    epsilon: float
    mu0: float
    mu1: float
    mu2: float
    alpha: float
    gamma: float
    status: str = "optimal"
    solver: str = ""
    solve_time: float = 0.0
    residuals: dict[str, float] = field(default_factory=dict)  # max eigenvalue per LMI block
    condition_number: float = 1.0
    linear_part: str = "identity"
    z_scale: float = 0.0
    sensors: tuple[int, ...] = ()
    sweep: list[SweepRow] = field(default_factory=list)
    gamma_hat: Optional[float] = None  # sampled Lipschitz level of the nonlinear remainder

    @property
    def mu(self) -> float:
        """Performance level sqrt(mu0 mu1 + mu2)."""
        return float(np.sqrt(self.mu0 * self.mu1 + self.mu2))

    @property
    def n_states(self) -> int:
        return self.L.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.L.shape[1]

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_number > 1e12

    @property
    def bound_certified(self) -> Optional[bool]:
        """Whether gamma covers the sampled level; None when no sample was taken."""
        if self.gamma_hat is None:
            return None
        return self.gamma >= self.gamma_hat


@dataclass(eq=False)
class PlantRun:
    """Ground-truth trajectory and the measurement stream shared by every estimator."""

    states: np.ndarray  # x[k], (k_f, n)
    clean: np.ndarray  # C x[k], (k_f, p)
    measurements: np.ndarray  # y[k], (k_f, p)
    noise: np.ndarray  # v[k] = y[k] - C x[k], (k_f, p)
    schedule: InputSchedule
    digest: str
    process_noise: Optional[np.ndarray] = None  # added to x[k+1], (k_f - 1, n)

    @property
    def horizon(self) -> int:
        return self.states.shape[0]

    @property
    def noise_linf(self) -> float:
        """Realized sup-norm max_k ||v[k]||_2 of the measurement noise."""
        if self.noise.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.noise, axis=1)))


@dataclass(eq=False)
class EstimationTrace:
    """Per-step record of one estimator run."""

    estimator: str
    states: np.ndarray  # x[k], (k_f, n)
    estimates: np.ndarray  # xhat[k], (k_f, n)
    measurements: np.ndarray  # y[k], (k_f, p)
    error_norms: np.ndarray  # ||e[k]||_2, (k_f,)
    performance_norms: np.ndarray  # ||Z e[k]||_2, (k_f,)
    wall_time: float = 0.0
    clamp_steps: int = 0  # steps at which the estimate had to be clamped
    repairs: int = 0  # covariance repairs (unscented filter only)

    def __post_init__(self) -> None:
        horizon = len(self.states)
        for name in ("estimates", "measurements", "error_norms", "performance_norms"):
            if len(getattr(self, name)) != horizon:
                raise ValueError(f"Trace field '{name}' does not match the horizon {horizon}")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def errors(self) -> np.ndarray:
        """e[k] = x[k] - xhat[k]."""
        return self.states - self.estimates

    @property
    def mean_step_time(self) -> float:
        return self.wall_time / len(self) if len(self) else 0.0


@dataclass
class PerformanceSummary:
    """Performance-output series checked against zeta = mu ||w||_Linf."""

    series: np.ndarray  # ||z[k]||_2
    w_linf: float
    mu: float
    settle_step: Optional[int] = None  # first k after which ||z|| stays <= zeta

    @property
    def zeta(self) -> float:
        return self.mu * self.w_linf

    def below_fraction(self) -> float:
        """Fraction of steps with ||z[k]|| <= zeta."""
        if len(self.series) == 0:
            return 0.0
        return float(np.mean(self.series <= self.zeta))


@dataclass(eq=False)
class ExperimentReport:
    """Observer versus unscented-filter comparison on one measurement stream."""

    scenario: str
    seed: int
    digest: str  # measurement-stream digest seen by both estimators
    observer: Optional[EstimationTrace]
    ukf: Optional[EstimationTrace]
    mu: float
    w_linf: float  # disturbance sup-norm in model coordinates
    v_linf: float  # raw measurement-noise sup-norm
    settle_step: Optional[int] = None
    observer_rmse_components: list[float] = field(default_factory=list)
    ukf_rmse_components: list[float] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    wall_times: dict[str, float] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def zeta(self) -> float:
        return self.mu * self.w_linf

    @property
    def observer_rmse(self) -> Optional[float]:
        return float(sum(self.observer_rmse_components)) if self.observer_rmse_components else None

    @property
    def ukf_rmse(self) -> Optional[float]:
        return float(sum(self.ukf_rmse_components)) if self.ukf_rmse_components else None

    @property
    def succeeded(self) -> bool:
        return not self.failures


@dataclass
class LipschitzEstimate:
    """Monte-Carlo lower bound on a Lipschitz constant."""

    gamma_hat: float
    samples: int
    skipped: int  # pairs with zero distance
    seed: int
    elapsed: float = 0.0
    linear_part: str = "identity"
    asserted: Optional[float] = None  # level used for synthesis, for comparison

    @property
    def within_asserted(self) -> Optional[bool]:
        if self.asserted is None:
            return None
        return self.gamma_hat <= self.asserted


@dataclass(eq=False)
class ReplicationSummary:
    """Per-seed reports of a Monte-Carlo study and their aggregates."""

    reports: list[ExperimentReport]

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.reports]

    def _values(self, attr: str) -> np.ndarray:
        values = [getattr(r, attr) for r in self.reports]
        return np.array([v for v in values if v is not None], dtype=float)

    def _times(self, arm: str) -> np.ndarray:
        return np.array([r.wall_times[arm] for r in self.reports if arm in r.wall_times])

    def aggregate(self) -> dict[str, dict[str, float]]:
        """Mean and standard deviation of RMSE and wall-time per estimator."""
        stats: dict[str, dict[str, float]] = {}
        for arm, attr in (("observer", "observer_rmse"), ("ukf", "ukf_rmse")):
            rmse = self._values(attr)
            times = self._times(arm)
            stats[arm] = {
                "rmse_mean": float(rmse.mean()) if rmse.size else float("nan"),
                "rmse_std": float(rmse.std()) if rmse.size else float("nan"),
                "time_mean": float(times.mean()) if times.size else float("nan"),
                "time_std": float(times.std()) if times.size else float("nan"),
            }
        return stats

    @property
    def observer_wins(self) -> int:
        """Number of seeds where the observer RMSE beats the unscented filter."""
        return sum(
            1
            for r in self.reports
            if r.observer_rmse is not None
            and r.ukf_rmse is not None
            and r.observer_rmse < r.ukf_rmse
        )
