"""Synthesize command."""

from typing import Optional

import typer

from trafficobs_core.io.reports import write_synthesis_report
from trafficobs_core.pipeline.experiment import synthesize
from trafficobs_cli.commands.common import (
    Overrides,
    exit_on_error,
    load_scenario_or_exit,
    prepare_out_dir,
    warn_if_uncertified,
)
from trafficobs_cli.output.progress import progress_bar
from trafficobs_cli.output.table import print_synthesis


def synthesize_command(
    scenario_source: str,
    out: Optional[str],
    overrides: Overrides,
    alpha_grid: Optional[list[float]] = None,
    quiet: bool = False,
) -> None:
    """
    Synthesize the observer gain and write synthesis.json.

    Example:
        trafficobs synthesize --scenario benchmark-10 --gamma 0.1
        trafficobs synthesize --alpha-grid 0.02 --alpha-grid 0.05 --alpha-grid 0.1
    """
    scenario = load_scenario_or_exit(scenario_source, overrides)
    if alpha_grid:
        scenario.synthesis.alpha_grid = list(alpha_grid)
    out_dir = prepare_out_dir(out)

    with exit_on_error():
        with progress_bar(description="Solving observer LMI...", total=None,
                          enabled=not quiet):
            result = synthesize(scenario)
        path = write_synthesis_report(result, out_dir / "synthesis.json")

    if not quiet:
        print_synthesis(result)
    warn_if_uncertified(result.gamma, result.gamma_hat)
    if result.ill_conditioned:
        typer.echo(
            f"Warning: certificate is ill-conditioned (cond(P) = {result.condition_number:.3g})",
            err=True,
        )
    typer.echo(f"mu = {result.mu:.6g}; wrote {path}")
