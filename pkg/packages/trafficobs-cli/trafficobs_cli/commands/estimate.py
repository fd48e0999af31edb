"""Estimate command."""

from typing import Optional

import typer

from trafficobs_core.io.reports import write_trace_csv
from trafficobs_core.pipeline.experiment import run_experiment
from trafficobs_core.pipeline.stages.estimate import ESTIMATORS
from trafficobs_cli.commands.common import (
    ExitCode,
    Overrides,
    exit_on_error,
    fail,
    load_scenario_or_exit,
    prepare_out_dir,
)
from trafficobs_cli.output.progress import progress_bar
from trafficobs_cli.output.table import print_report


def estimate_command(
    scenario_source: str,
    out: Optional[str],
    overrides: Overrides,
    estimator: str = "observer",
    gain: Optional[str] = None,
    quiet: bool = False,
) -> None:
    """
    Run one estimator on a simulated measurement stream and write its trace.

    Example:
        trafficobs estimate --estimator ukf --seed 7
        trafficobs estimate --gain runs/synthesis.json
    """
    if estimator not in ESTIMATORS:
        raise fail(f"Unknown estimator '{estimator}' (choose from {', '.join(ESTIMATORS)})",
                   ExitCode.PARSE)
    scenario = load_scenario_or_exit(scenario_source, overrides)
    out_dir = prepare_out_dir(out)

    with exit_on_error():
        with progress_bar(description=f"Running {estimator}...", enabled=not quiet) as prog:
            report = run_experiment(
                scenario,
                gain_source=gain if estimator == "observer" else None,
                estimators=(estimator,),
                progress_callback=prog.stage_callback,
            )
        trace = report.observer if estimator == "observer" else report.ukf
        assert trace is not None
        path = write_trace_csv(
            trace, out_dir / f"{estimator}_trace.csv", scenario.topo.state_labels()
        )

    if not quiet:
        print_report(report)
    rmse = report.observer_rmse if estimator == "observer" else report.ukf_rmse
    typer.echo(f"{estimator} RMSE = {rmse:.6g}; wrote {path}")
