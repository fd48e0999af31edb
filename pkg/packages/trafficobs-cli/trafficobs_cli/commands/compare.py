"""Compare command."""

from typing import Optional

import typer

from trafficobs_core.io.reports import (
    write_experiment_report,
    write_figure_series,
    write_replication_summary,
    write_trace_csv,
)
from trafficobs_core.pipeline.experiment import run_experiment, run_replications
from trafficobs_cli.commands.common import (
    ExitCode,
    Overrides,
    exit_on_error,
    fail,
    load_scenario_or_exit,
    prepare_out_dir,
    warn_if_uncertified,
)
from trafficobs_cli.config.settings import load_user_config
from trafficobs_cli.output.progress import progress_bar
from trafficobs_cli.output.table import print_replications, print_report


def compare_command(
    scenario_source: str,
    out: Optional[str],
    overrides: Overrides,
    gain: Optional[str] = None,
    replications: int = 1,
    parallel: bool = False,
    traces: Optional[bool] = None,
    quiet: bool = False,
) -> None:
    """
    Run the observer and the unscented filter on the same measurements.

    Writes report.json, the per-estimator traces and the plot-ready CSV series.
    With --replications K the seeds seed..seed+K-1 are run with one shared gain.

    Example:
        trafficobs compare --scenario benchmark-10 -o ./runs/compare
        trafficobs compare --replications 5 --gain runs/synthesis.json
    """
    if replications < 1:
        raise fail("--replications must be at least 1", ExitCode.PARSE)
    config = load_user_config()
    scenario = load_scenario_or_exit(scenario_source, overrides, config)
    out_dir = prepare_out_dir(out, config)
    embed = config.output.traces if traces is None else traces

    if replications > 1:
        seeds = [scenario.seed + i for i in range(replications)]
        with exit_on_error():
            with progress_bar(description=f"Running {replications} replications...",
                              total=None, enabled=not quiet):
                summary = run_replications(
                    scenario, seeds, gain_source=gain, workers=config.solver.workers
                )
            path = write_replication_summary(summary, out_dir / "replications.json")
        print_replications(summary)
        if summary.reports:
            _warn_for(summary.reports[0].metadata)
        typer.echo(f"Wrote {path}")
        return

    with exit_on_error():
        with progress_bar(description="Running experiment...", enabled=not quiet) as prog:
            report = run_experiment(
                scenario,
                gain_source=gain,
                parallel=parallel,
                progress_callback=prog.stage_callback,
            )
        labels = scenario.topo.state_labels()
        write_experiment_report(report, out_dir / "report.json", include_traces=embed)
        for trace in (report.observer, report.ukf):
            if trace is not None:
                write_trace_csv(trace, out_dir / f"{trace.estimator}_trace.csv", labels)
        if config.output.figures:
            write_figure_series(report, out_dir, labels)

    print_report(report)
    _warn_for(report.metadata)
    if report.failures:
        typer.echo(f"Warning: estimator failures: {report.failures}", err=True)
    typer.echo(f"Wrote report to {out_dir}")


def _warn_for(metadata: dict) -> None:
    warn_if_uncertified(metadata.get("gamma"), metadata.get("gamma_hat"))
