"""Scenario model: everything needed to reproduce one experiment."""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from trafficobs_core.errors import ScenarioError
from trafficobs_core.models.config import (
    InputConfig,
    NoiseConfig,
    ObserverConfig,
    SynthesisConfig,
    UkfConfig,
)
from trafficobs_core.models.highway import FundamentalDiagram, HighwayTopology, InputSchedule


@dataclass(eq=False)
class Scenario:
    """A highway, its sensors, the run length and every estimator setting."""

    name: str
    topo: HighwayTopology
    fd: FundamentalDiagram
    horizon: int = 3000  # k_f
    seed: int = 0
    inputs: InputConfig = field(default_factory=InputConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    ukf: UkfConfig = field(default_factory=UkfConfig)
    observer: ObserverConfig = field(default_factory=ObserverConfig)
    description: str = ""

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ScenarioError(f"Horizon must be at least one step, got {self.horizon}")
        if not 0 <= self.inputs.split_ratio < 1:
            raise ScenarioError(f"Split ratio must lie in [0, 1), got {self.inputs.split_ratio}")
        if self.inputs.hold_steps < 1:
            raise ScenarioError("Input hold must be at least one step")
        if self.noise.r_meas < 0 or self.noise.q_proc < 0:
            raise ScenarioError("Noise variances must be nonnegative")

    @property
    def beta(self) -> np.ndarray:
        """Constant split ratio on every off-ramp."""
        return np.full(self.topo.n_offramps, self.inputs.split_ratio)

    @property
    def initial_estimate(self) -> np.ndarray:
        """Starting estimate shared by the observer and the unscented filter."""
        level = self.observer.initial_density
        if level is None:
            level = self.fd.rho_m / 2
        return np.full(self.topo.n_states, float(level))

    @cached_property
    def input_schedule(self) -> InputSchedule:
        """Random piecewise-constant inputs drawn from the scenario seed."""
        from trafficobs_core.processors.harness import derive_seeds, generate_inputs

        return generate_inputs(
            self.topo,
            self.fd,
            self.horizon,
            derive_seeds(self.seed).inputs,
            hold_steps=self.inputs.hold_steps,
            split_ratio=self.inputs.split_ratio,
        )

    def with_seed(self, seed: int) -> "Scenario":
        """Copy of this scenario with another seed."""
        return replace(self, seed=seed)
