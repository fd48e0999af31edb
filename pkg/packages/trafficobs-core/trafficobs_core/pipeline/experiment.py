"""End-to-end experiments: simulate, synthesize, estimate, report."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from trafficobs_core.errors import TrafficObsError
from trafficobs_core.models.experiment import Experiment, ExperimentStatus
from trafficobs_core.models.results import ExperimentReport, ReplicationSummary, SynthesisResult
from trafficobs_core.models.scenario import Scenario
from trafficobs_core.pipeline.base import Pipeline, PipelineResult, PipelineStage

logger = logging.getLogger(__name__)

GainSource = Union[SynthesisResult, Path, str, None]


def resolve_gain(gain_source: GainSource) -> Optional[SynthesisResult]:
    """A stored gain given directly or as the path of a synthesis report."""
    if gain_source is None or isinstance(gain_source, SynthesisResult):
        return gain_source
    from trafficobs_core.io.reports import read_synthesis_report

    return read_synthesis_report(Path(gain_source))


class ExperimentPipeline(Pipeline):
    """
    Complete observer-versus-filter experiment.

    Runs all stages: simulate -> synthesize -> estimate
    The synthesize stage is left out when only the unscented filter runs.
    """

    def __init__(
        self,
        gain: Optional[SynthesisResult] = None,
        estimators: Sequence[str] = ("observer", "ukf"),
        parallel: bool = False,
        progress_callback: Optional[Callable[[str, float, str], None]] = None,
    ):
        from trafficobs_core.pipeline.stages.estimate import EstimateStage
        from trafficobs_core.pipeline.stages.simulate import SimulateStage
        from trafficobs_core.pipeline.stages.synthesize import SynthesizeStage

        stages: list[PipelineStage] = [SimulateStage()]
        if "observer" in estimators:
            stages.append(SynthesizeStage(gain=gain))
        stages.append(EstimateStage(estimators, parallel=parallel))

        super().__init__(stages, progress_callback)


def _raise_for(result: PipelineResult) -> None:
    if result.success:
        return
    if result.exception is not None:
        raise result.exception
    raise TrafficObsError(result.error or "Pipeline failed")


def simulate(scenario: Scenario, x0: Optional[np.ndarray] = None) -> Experiment:
    """Run the simulate stage only; the experiment holds the system and plant run."""
    from trafficobs_core.pipeline.stages.simulate import SimulateStage

    experiment = Experiment(scenario=scenario)
    _raise_for(Pipeline([SimulateStage()]).execute(experiment, x0=x0))
    experiment.update_status(ExperimentStatus.COMPLETED, progress=100)
    return experiment


def synthesize(scenario: Scenario) -> SynthesisResult:
    """Assemble the scenario's system, synthesize its gain and check gamma by sampling."""
    from trafficobs_core.processors.actm import assemble_system
    from trafficobs_core.processors.lipschitz import check_lipschitz_level
    from trafficobs_core.processors.synthesis import LmiSynthesizer

    system = assemble_system(
        scenario.topo,
        scenario.fd,
        scenario.noise.disturbance,
        scenario.synthesis.linear_part,
        beta=scenario.beta,
    )
    result = LmiSynthesizer(scenario.synthesis).synthesize(system)
    check_lipschitz_level(result, scenario)
    return result


def build_report(experiment: Experiment) -> ExperimentReport:
    """
    Summarize a finished experiment.

    Args:
        experiment: Experiment with a plant run and at least one trace

    Returns:
        ExperimentReport
    """
    from trafficobs_core.processors.harness import disturbance_linf
    from trafficobs_core.processors.metrics import per_component_rmse, performance_norm

    scenario = experiment.scenario
    plant = experiment.plant
    if plant is None:
        raise TrafficObsError("Cannot report on an experiment without a plant run")

    w_linf = disturbance_linf(plant, scenario.noise)
    mu = experiment.synthesis.mu if experiment.synthesis is not None else float("nan")
    observer = experiment.traces.get("observer")
    ukf = experiment.traces.get("ukf")

    settle = None
    if observer is not None and experiment.synthesis is not None:
        Z = scenario.synthesis.z_scale * np.eye(plant.states.shape[1])
        settle = performance_norm(observer, Z, mu, w_linf).settle_step

    metadata = dict(experiment.metadata)
    metadata.update(
        {
            "horizon": plant.horizon,
            "n_states": plant.states.shape[1],
            "n_outputs": plant.measurements.shape[1],
            "linear_part": scenario.synthesis.linear_part.value,
            "z_scale": scenario.synthesis.z_scale,
            "gamma": (
                experiment.synthesis.gamma
                if experiment.synthesis is not None
                else scenario.synthesis.gamma
            ),
            "alpha": scenario.synthesis.alpha,
        }
    )
    return ExperimentReport(
        scenario=scenario.name,
        seed=scenario.seed,
        digest=plant.digest,
        observer=observer,
        ukf=ukf,
        mu=mu,
        w_linf=w_linf,
        v_linf=plant.noise_linf,
        settle_step=settle,
        observer_rmse_components=(
            per_component_rmse(observer).tolist() if observer is not None else []
        ),
        ukf_rmse_components=per_component_rmse(ukf).tolist() if ukf is not None else [],
        failures=dict(experiment.failures),
        wall_times=dict(experiment.wall_times),
        metadata=metadata,
    )


def run_experiment(
    scenario: Scenario,
    gain_source: GainSource = None,
    estimators: Sequence[str] = ("observer", "ukf"),
    x0: Optional[np.ndarray] = None,
    parallel: bool = False,
    progress_callback: Optional[Callable[[str, float, str], None]] = None,
) -> ExperimentReport:
    """
    Simulate the plant once and run every estimator on the same measurements.

    Args:
        scenario: Scenario to run
        gain_source: Stored gain (result or synthesis report path); synthesized inline if None
        estimators: Estimators to run
        x0: Optional true initial densities
        parallel: Run the estimator arms concurrently
        progress_callback: Called with (stage, percent, message) after each stage

    Returns:
        ExperimentReport

    Raises:
        TrafficObsError: The original error of the failing stage
    """
    experiment = Experiment(scenario=scenario)
    pipeline = ExperimentPipeline(
        gain=resolve_gain(gain_source),
        estimators=estimators,
        parallel=parallel,
        progress_callback=progress_callback,
    )
    result = pipeline.execute(experiment, x0=x0)
    if not result.success:
        logger.error("Experiment %s failed: %s", experiment.id, result.error)
    _raise_for(result)

    experiment.update_status(ExperimentStatus.COMPLETED, progress=100)
    report = build_report(experiment)
    logger.info(
        "Experiment %s seed=%d: observer RMSE=%s, UKF RMSE=%s",
        scenario.name, scenario.seed, report.observer_rmse, report.ukf_rmse,
    )
    return report


def run_replications(
    scenario: Scenario,
    seeds: Sequence[int],
    gain_source: GainSource = None,
    estimators: Sequence[str] = ("observer", "ukf"),
    workers: int = 1,
) -> ReplicationSummary:
    """
    Repeat an experiment over several seeds.

    The gain depends on the network only, so it is synthesized once and shared.

    Args:
        scenario: Scenario; its seed is replaced by each entry of seeds
        seeds: Seeds to run
        gain_source: Stored gain, synthesized once if None
        estimators: Estimators to run
        workers: Number of seeds run concurrently

    Returns:
        ReplicationSummary with one report per seed, in the order of seeds
    """
    if not seeds:
        raise ValueError("At least one seed is required")
    gain = resolve_gain(gain_source)
    if gain is None and "observer" in estimators:
        gain = synthesize(scenario)

    def run(seed: int) -> ExperimentReport:
        return run_experiment(scenario.with_seed(seed), gain, estimators)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, seeds))
    else:
        reports = [run(seed) for seed in seeds]
    return ReplicationSummary(reports=reports)
