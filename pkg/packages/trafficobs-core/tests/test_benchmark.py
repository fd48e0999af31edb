"""End-to-end checks on the bundled ten-section benchmark.

These solve the 30-state program and run thousands of estimator steps, so they are
marked slow; deselect them with ``-m "not slow"``.
"""

from dataclasses import replace

import numpy as np
import pytest

from trafficobs_core.io.scenario_file import load_scenario
from trafficobs_core.models.config import NoiseConfig
from trafficobs_core.pipeline.experiment import (
    run_experiment,
    run_replications,
    simulate,
    synthesize,
)
from trafficobs_core.processors.metrics import performance_norm
from trafficobs_core.processors.observer import LuenbergerObserver

pytestmark = pytest.mark.slow

SEEDS = range(5)


@pytest.fixture(scope="module")
def scenario():
    return load_scenario("benchmark-10")


@pytest.fixture(scope="module")
def gain(scenario):
    return synthesize(scenario)


@pytest.fixture(scope="module")
def summary(scenario, gain):
    return run_replications(scenario, list(SEEDS), gain_source=gain)


def test_benchmark_gain_is_certified_by_the_solver(gain):
    """Feasible at the bundled alpha and gamma, with both blocks re-checked."""
    assert gain.status in ("optimal", "optimal_inaccurate")
    assert gain.residuals["main"] <= 1e-7
    assert gain.residuals["perf"] <= 1e-7
    assert gain.residuals["P_min"] > 0
    assert gain.mu == pytest.approx(0.104, rel=0.1)
    assert gain.L.shape == (30, 13)


def test_benchmark_gamma_is_below_sampled_level(gain):
    """The free-flow split leaves a remainder steeper than the bundled gamma."""
    assert gain.gamma_hat is not None
    assert gain.gamma_hat > gain.gamma
    assert gain.bound_certified is False


def test_noise_free_error_converges_from_random_starts(scenario, gain):
    """Exact measurements: the error decays from every sampled initial condition."""
    quiet = replace(scenario, noise=NoiseConfig(q_proc=0.0, r_meas=0.0))
    Z = quiet.synthesis.z_scale * np.eye(quiet.topo.n_states)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for seed in range(20):
        experiment = simulate(replace(quiet, seed=seed))
        observer = LuenbergerObserver(experiment.system, gain)
        x0 = rng.uniform(0.0, quiet.fd.rho_m, size=quiet.topo.n_states)
        trace = observer.run(experiment.plant, x0, Z)
        assert trace.error_norms[0] > 0
        worst = max(worst, trace.error_norms[-1] / trace.error_norms[0])
    assert worst <= 1e-8


def test_performance_output_stays_below_level(scenario, gain):
    """||z[k]|| <= zeta over the second half of the run."""
    report = run_experiment(scenario, gain_source=gain, estimators=("observer",))
    Z = scenario.synthesis.z_scale * np.eye(scenario.topo.n_states)
    summary = performance_norm(report.observer, Z, gain.mu, report.w_linf)
    tail = summary.series[len(summary.series) // 2:]
    assert np.all(tail <= summary.zeta)


def test_observer_beats_filter_on_every_seed(summary):
    assert summary.seeds == list(SEEDS)
    for report in summary.reports:
        assert report.succeeded, report.failures
        assert report.observer_rmse < report.ukf_rmse


def test_observer_is_much_faster_than_filter(summary):
    """Estimation loops only; the filter propagates 2n + 1 sigma points per step."""
    observer = sum(report.observer.wall_time for report in summary.reports)
    ukf = sum(report.ukf.wall_time for report in summary.reports)
    assert ukf / observer >= 5.0
