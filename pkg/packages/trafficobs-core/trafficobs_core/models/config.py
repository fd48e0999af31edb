"""Configuration models for Traffic Observer Core."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np


class LinearPart(str, Enum):
    """How the step map is split into a linear part A and a nonlinearity f."""

    IDENTITY = "identity"  # A = I, f = step(x) - x
    FREE_FLOW = "free-flow"  # A = free-flow Jacobian, f = step(x) - A x


class SolverName(str, Enum):
    """Conic solvers accepted by the synthesizer."""

    CLARABEL = "CLARABEL"
    SCS = "SCS"


@dataclass
class DisturbanceConfig:
    """Lumped disturbance channels w = [process | measurement].

    B_w = [sqrt(q_proc) I | 0] and D_w = [0 | sqrt(r_meas) I], so the disturbance
    dimension is always n + p.
    """

    q_proc: float = 0.0
    r_meas: float = 1e-3

    def matrices(self, n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
        """Build (B_w, D_w) for a system with n states and p sensors."""
        b_w = np.hstack([np.sqrt(self.q_proc) * np.eye(n), np.zeros((n, p))])
        d_w = np.hstack([np.zeros((p, n)), np.sqrt(self.r_meas) * np.eye(p)])
        return b_w, d_w


@dataclass
class NoiseConfig:
    """Process and measurement noise of a run."""

    q_proc: float = 0.0  # process noise variance per state
    r_meas: float = 1e-3  # measurement noise variance per sensor
    truncation: float = 3.0  # Gaussian samples are cut at +/- truncation * sigma

    @property
    def disturbance(self) -> DisturbanceConfig:
        """Disturbance channels matching this noise level."""
        return DisturbanceConfig(q_proc=self.q_proc, r_meas=self.r_meas)

    def measurement_bound(self, p: int) -> float:
        """Hard bound on the per-step noise norm, truncation * sqrt(p * r_meas)."""
        return self.truncation * float(np.sqrt(p * self.r_meas))


@dataclass
class InputConfig:
    """Random exogenous input construction."""

    hold_steps: int = 60  # H, steps between redraws
    split_ratio: float = 0.1  # beta on every off-ramp


@dataclass
class SynthesisConfig:
    """Settings for the observer-gain semidefinite program."""

    alpha: float = 0.05
    gamma: float = 0.5
    mu1: float = 1e4
    z_scale: float = 0.1  # Z = z_scale * I
    linear_part: LinearPart = LinearPart.IDENTITY
    solver: SolverName = SolverName.CLARABEL
    alpha_grid: list[float] = field(default_factory=list)  # empty: solve at alpha only
    delta_p: float = 1e-8  # P >= delta_p * I
    margin: float = 1e-7  # strictness margin on both LMIs, solver coordinates
    residual_tol: float = 1e-7
    cond_limit: float = 1e12
    workers: int = 1  # concurrent grid points in an alpha sweep
    lipschitz_samples: int = 20_000  # pairs sampled to check gamma; below 2 skips the check

    @property
    def solver_name(self) -> str:
        return self.solver.value


@dataclass
class UkfConfig:
    """Unscented Kalman filter constants."""

    alpha: float = 0.01
    beta: float = 2.0
    kappa: float = -4.0
    q: float = 1e-3  # Q = q * I
    r: float = 1e-3  # R = r * I
    p0: float = 1e-4  # P_0 = p0 * I
    eig_floor: float = 1e-12

    def scaling(self, n: int) -> float:
        """Sigma-point scaling lambda = alpha^2 (n + kappa) - n."""
        return self.alpha**2 * (n + self.kappa) - n


@dataclass
class ObserverConfig:
    """Initial estimate used by both estimators."""

    initial_density: Optional[float] = None  # None: rho_m / 2 on every state
