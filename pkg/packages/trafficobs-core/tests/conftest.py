"""Shared fixtures for trafficobs-core tests."""

import numpy as np
import pytest

from trafficobs_core.models.config import (
    InputConfig,
    NoiseConfig,
    ObserverConfig,
    SynthesisConfig,
    UkfConfig,
)
from trafficobs_core.models.highway import FundamentalDiagram, HighwayTopology
from trafficobs_core.models.scenario import Scenario

BENCHMARK_SENSORS = (2, 5, 10, 12, 14, 15, 17, 19, 21, 23, 26, 28, 30)


@pytest.fixture
def fd() -> FundamentalDiagram:
    """Fundamental diagram of the ten-section benchmark highway."""
    return FundamentalDiagram(v_f=28.8889, w_c=6.6667, rho_c=0.0249, rho_m=0.1333)


@pytest.fixture
def benchmark_topo() -> HighwayTopology:
    """Ten sections, an on-ramp and an off-ramp on every section, 13 sensors."""
    sections = tuple(range(1, 11))
    return HighwayTopology(
        n_sections=10,
        onramp_sections=sections,
        offramp_sections=sections,
        sensors=BENCHMARK_SENSORS,
    )


@pytest.fixture
def small_topo() -> HighwayTopology:
    """Two sections, on-ramp on the first, off-ramp on the second, every state measured."""
    return HighwayTopology(
        n_sections=2, onramp_sections=(1,), offramp_sections=(2,), sensors=(1, 2, 3, 4)
    )


@pytest.fixture
def small_scenario(small_topo, fd) -> Scenario:
    """Short, fully measured run that synthesizes in well under a second."""
    return Scenario(
        name="small",
        topo=small_topo,
        fd=fd,
        horizon=40,
        seed=3,
        inputs=InputConfig(hold_steps=10, split_ratio=0.1),
        noise=NoiseConfig(q_proc=0.0, r_meas=1e-6),
        synthesis=SynthesisConfig(alpha=0.05, gamma=0.05, mu1=1e4, z_scale=0.1),
        ukf=UkfConfig(alpha=1.0, beta=2.0, kappa=0.0, q=1e-6, r=1e-6, p0=1e-4),
        observer=ObserverConfig(),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
