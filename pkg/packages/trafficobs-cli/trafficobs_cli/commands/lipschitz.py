"""Lipschitz command."""

from typing import Optional

import typer

from trafficobs_core.io.reports import write_lipschitz_report
from trafficobs_core.processors.lipschitz import estimate_lipschitz
from trafficobs_cli.commands.common import (
    Overrides,
    exit_on_error,
    load_scenario_or_exit,
    prepare_out_dir,
)
from trafficobs_cli.output.table import fmt, print_table


def lipschitz_command(
    scenario_source: str,
    out: Optional[str],
    overrides: Overrides,
    samples: int = 100_000,
) -> None:
    """
    Estimate the Lipschitz level of the highway nonlinearity by sampling.

    The estimate is a lower bound; it is reported next to the level used for synthesis.

    Example:
        trafficobs lipschitz --scenario benchmark-10 --samples 200000 --seed 1
    """
    scenario = load_scenario_or_exit(scenario_source, overrides)
    out_dir = prepare_out_dir(out)

    with exit_on_error():
        estimate = estimate_lipschitz(
            scenario.topo,
            scenario.fd,
            samples=samples,
            seed=scenario.seed,
            beta=scenario.beta,
            linear_part=scenario.synthesis.linear_part,
        )
        estimate.asserted = scenario.synthesis.gamma
        path = write_lipschitz_report(estimate, out_dir / "lipschitz.json")

    print_table(
        ["Quantity", "Value"],
        [
            ["Split", estimate.linear_part],
            ["gamma_hat", fmt(estimate.gamma_hat, 6)],
            ["gamma (synthesis)", fmt(estimate.asserted)],
            ["Within", fmt(estimate.within_asserted)],
            ["Samples", str(estimate.samples)],
            ["Skipped", str(estimate.skipped)],
            ["Elapsed", f"{estimate.elapsed:.2f}s"],
        ],
        title="Sampled Lipschitz level",
    )
    if estimate.within_asserted is False:
        typer.echo(
            "Warning: the sampled level exceeds the gamma used for synthesis", err=True
        )
    typer.echo(f"Wrote {path}")
