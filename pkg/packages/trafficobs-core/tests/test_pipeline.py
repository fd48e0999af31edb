"""End-to-end experiment tests on the two-section highway."""

import math
from dataclasses import replace

import numpy as np
import pytest

from trafficobs_core.errors import DetectabilityError, SynthesisError
from trafficobs_core.models.config import NoiseConfig, UkfConfig
from trafficobs_core.models.highway import HighwayTopology
from trafficobs_core.models.experiment import Experiment
from trafficobs_core.models.results import SynthesisResult
from trafficobs_core.pipeline.experiment import (
    ExperimentPipeline,
    run_experiment,
    run_replications,
    simulate,
    synthesize,
)


def _fixed_gain(n: int = 4, level: float = 0.5) -> SynthesisResult:
    return SynthesisResult(
        L=level * np.eye(n), P=np.eye(n), Y=level * np.eye(n),
        epsilon=1.0, mu0=1.0, mu1=1.0, mu2=1.0, alpha=0.05, gamma=0.05,
    )


def test_simulate_only(small_scenario):
    experiment = simulate(small_scenario)
    assert experiment.is_complete
    assert experiment.plant.states.shape == (40, 4)
    assert experiment.metadata["digest"] == experiment.plant.digest
    assert experiment.synthesis is None


def test_run_experiment_both_estimators(small_scenario):
    """Both arms see the same stream and report finite accuracy figures."""
    report = run_experiment(small_scenario)
    assert report.succeeded
    assert report.observer is not None and report.ukf is not None
    assert np.array_equal(report.observer.measurements, report.ukf.measurements)
    assert np.isfinite(report.observer_rmse)
    assert np.isfinite(report.ukf_rmse)
    assert np.isfinite(report.mu)
    assert report.metadata["gain_reused"] is False
    assert report.metadata["horizon"] == 40
    assert report.seed == 3


def test_run_experiment_is_deterministic(small_scenario):
    first = run_experiment(small_scenario)
    second = run_experiment(small_scenario)
    assert first.digest == second.digest
    assert np.array_equal(first.observer.estimates, second.observer.estimates)
    assert np.array_equal(first.ukf.estimates, second.ukf.estimates)


def test_parallel_arms_match_sequential(small_scenario):
    sequential = run_experiment(small_scenario)
    parallel = run_experiment(small_scenario, parallel=True)
    assert np.array_equal(sequential.observer.estimates, parallel.observer.estimates)
    assert np.array_equal(sequential.ukf.estimates, parallel.ukf.estimates)


def test_stored_gain_with_matched_start_and_no_noise(small_scenario):
    """Exact measurements and xhat[0] = x[0]: the observer error stays at zero."""
    scenario = replace(small_scenario, noise=NoiseConfig(r_meas=0.0))
    report = run_experiment(
        scenario, _fixed_gain(), estimators=("observer",), x0=scenario.initial_estimate
    )
    assert report.metadata["gain_reused"] is True
    assert report.observer_rmse <= 1e-12
    assert report.v_linf == 0.0
    assert report.ukf is None


def test_stored_gain_of_wrong_shape_is_rejected(small_scenario):
    with pytest.raises(SynthesisError):
        run_experiment(small_scenario, _fixed_gain(n=3), estimators=("observer",))


def test_failing_filter_does_not_stop_the_observer(small_scenario):
    """Constants with n + lambda = 0 fail the filter arm only."""
    scenario = replace(small_scenario, ukf=UkfConfig(alpha=0.01, kappa=-4.0))
    report = run_experiment(scenario)
    assert "ukf" in report.failures
    assert not report.succeeded
    assert report.observer is not None
    assert report.ukf is None
    assert report.ukf_rmse is None


def test_filter_only_run_has_no_performance_level(small_scenario):
    report = run_experiment(small_scenario, estimators=("ukf",))
    assert report.observer is None
    assert math.isnan(report.mu)
    assert report.settle_step is None


def test_undetectable_layout_raises(small_scenario):
    """One sensor with the identity split leaves unit-circle modes unobserved."""
    topo = HighwayTopology(n_sections=2, onramp_sections=(1,), offramp_sections=(2,),
                           sensors=(1,))
    scenario = replace(small_scenario, topo=topo)
    with pytest.raises(DetectabilityError):
        run_experiment(scenario)
    with pytest.raises(DetectabilityError):
        synthesize(scenario)


def test_replications_share_one_gain(small_scenario):
    summary = run_replications(small_scenario, [1, 2])
    assert summary.seeds == [1, 2]
    first, second = summary.reports
    assert first.digest != second.digest
    assert first.mu == second.mu
    assert all(report.metadata["gain_reused"] for report in summary.reports)
    stats = summary.aggregate()
    assert set(stats) >= {"observer", "ukf"}


def test_replications_need_seeds(small_scenario):
    with pytest.raises(ValueError):
        run_replications(small_scenario, [])


def test_synthesis_records_sampled_lipschitz_level(small_scenario, caplog):
    """gamma below the sampled level leaves the bound uncertified and logs a warning."""
    scenario = replace(
        small_scenario, synthesis=replace(small_scenario.synthesis, gamma=0.0)
    )
    with caplog.at_level("WARNING", logger="trafficobs_core.processors.lipschitz"):
        result = synthesize(scenario)
    assert result.gamma_hat is not None and result.gamma_hat > 0
    assert result.bound_certified is False
    assert "not certified" in caplog.text

    skipped = replace(
        small_scenario, synthesis=replace(small_scenario.synthesis, lipschitz_samples=0)
    )
    assert synthesize(skipped).gamma_hat is None
    assert synthesize(skipped).bound_certified is None


def test_report_metadata_carries_sampled_level(small_scenario):
    report = run_experiment(small_scenario)
    gamma_hat = report.metadata["gamma_hat"]
    assert gamma_hat is not None
    assert report.metadata["gamma"] == small_scenario.synthesis.gamma
    assert report.metadata["bound_certified"] == (small_scenario.synthesis.gamma >= gamma_hat)


def test_pipeline_runs_every_stage_in_order(small_scenario):
    """Each stage stores its result and reports cumulative progress."""
    calls = []
    pipeline = ExperimentPipeline(
        progress_callback=lambda stage, pct, msg: calls.append((stage, pct))
    )
    result = pipeline.execute(Experiment(scenario=small_scenario))
    assert result.success, result.error
    assert [stage for stage, _ in calls] == ["simulate", "synthesize", "estimate"]
    assert [pct for _, pct in calls] == pytest.approx([100 / 3, 200 / 3, 100])
    assert list(result.stage_results) == ["simulate", "synthesize", "estimate"]
    assert result.stage_results["synthesize"] is result.experiment.synthesis
