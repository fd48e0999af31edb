"""Tests for the sampled Lipschitz level."""

import numpy as np
import pytest

from trafficobs_core.errors import ModelError
from trafficobs_core.models.config import LinearPart
from trafficobs_core.processors.lipschitz import estimate_lipschitz, sample_lipschitz

M = np.diag([2.0, 0.5])
UNIT_BOX = (np.zeros(2), np.ones(2))
NO_INPUT = (np.zeros(1), np.zeros(1))


def _linear(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return M @ x


def test_linear_map_estimate_approaches_largest_singular_value():
    """For f = M x the ratio never exceeds sigma_max(M) and gets close to it."""
    estimate = sample_lipschitz(_linear, UNIT_BOX, NO_INPUT, samples=20_000, seed=7)
    assert estimate.gamma_hat <= 2.0 + 1e-12
    assert estimate.gamma_hat >= 1.96
    assert estimate.samples == 20_000
    assert estimate.skipped == 0


def test_more_samples_never_lower_the_estimate():
    """The same seed reads the same stream prefix."""
    values = [
        sample_lipschitz(_linear, UNIT_BOX, NO_INPUT, samples=n, seed=3).gamma_hat
        for n in (100, 1000, 5000)
    ]
    assert values == sorted(values)


def test_degenerate_state_box_skips_every_pair():
    point = (np.full(2, 0.5), np.full(2, 0.5))
    estimate = sample_lipschitz(_linear, point, NO_INPUT, samples=50)
    assert estimate.skipped == 50
    assert estimate.gamma_hat == 0.0


def test_invalid_arguments():
    with pytest.raises(ModelError):
        sample_lipschitz(_linear, UNIT_BOX, NO_INPUT, samples=1)
    with pytest.raises(ModelError):
        sample_lipschitz(_linear, (np.ones(2), np.zeros(2)), NO_INPUT, samples=10)
    with pytest.raises(ModelError):
        sample_lipschitz(_linear, (np.zeros(2), np.ones(3)), NO_INPUT, samples=10)


def test_highway_estimate_is_deterministic(fd, small_topo):
    first = estimate_lipschitz(small_topo, fd, samples=2000, seed=5)
    second = estimate_lipschitz(small_topo, fd, samples=2000, seed=5)
    assert first.gamma_hat == second.gamma_hat
    assert first.gamma_hat > 0
    assert first.linear_part == "identity"


def test_highway_estimate_with_free_flow_split(fd, small_topo):
    estimate = estimate_lipschitz(small_topo, fd, samples=2000, seed=5,
                                  linear_part=LinearPart.FREE_FLOW)
    assert estimate.linear_part == "free-flow"
    assert np.isfinite(estimate.gamma_hat)
