"""Traffic Observer CLI - Main entry point."""

from typing import Annotated, Optional

import typer

from trafficobs_cli import __version__
from trafficobs_cli.commands import (
    compare_command,
    config_command,
    estimate_command,
    lipschitz_command,
    simulate_command,
    synthesize_command,
)
from trafficobs_cli.commands.common import Overrides
from trafficobs_cli.config.settings import OUT_DIR_ENV, load_user_config
from trafficobs_cli.output.logging import setup_logging

app = typer.Typer(
    name="trafficobs",
    help="Traffic Observer CLI - highway density estimation with an L-infinity observer",
    add_completion=True,
    no_args_is_help=True,
)

ScenarioOpt = Annotated[
    str,
    typer.Option("--scenario", "-s", help="Scenario JSON file or bundled scenario name"),
]
OutOpt = Annotated[
    Optional[str],
    typer.Option("--out", "-o", help=f"Output directory (default: ${OUT_DIR_ENV} or config)"),
]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", min=0, help="Scenario seed")]
HorizonOpt = Annotated[Optional[int], typer.Option("--horizon", help="Number of steps k_f")]
AlphaOpt = Annotated[Optional[float], typer.Option("--alpha", help="LMI decay parameter")]
GammaOpt = Annotated[Optional[float], typer.Option("--gamma", help="Lipschitz level")]
Mu1Opt = Annotated[Optional[float], typer.Option("--mu1", help="Fixed performance weight")]
NoiseOpt = Annotated[
    Optional[float], typer.Option("--noise-r", help="Measurement noise variance")
]
SolverOpt = Annotated[
    Optional[str], typer.Option("--solver", help="Conic solver: CLARABEL or SCS")
]
GainOpt = Annotated[
    Optional[str], typer.Option("--gain", help="Reuse the gain of a synthesis report")
]


def _show_version(value: bool) -> None:
    if value:
        typer.echo(f"trafficobs v{__version__}")
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    version: bool = typer.Option(
        False, "--version", "-v", callback=_show_version, is_eager=True, help="Show version"
    ),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Only warnings and results"),
    verbose: bool = typer.Option(False, "--verbose", help="Verbose output"),
):
    """Traffic Observer CLI."""
    level = load_user_config().logging.level
    if quiet:
        level = "WARNING"
    elif verbose:
        level = "DEBUG"
    setup_logging(level)
    ctx.obj = {"quiet": quiet}


def _quiet(ctx: typer.Context) -> bool:
    return bool(ctx.obj and ctx.obj.get("quiet"))


@app.command()
def simulate(
    scenario: ScenarioOpt = "benchmark-10",
    out: OutOpt = None,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    noise_r: NoiseOpt = None,
):
    """Simulate the highway and write the density and measurement CSVs."""
    simulate_command(scenario, out, Overrides(seed=seed, horizon=horizon, noise_r=noise_r))


@app.command()
def synthesize(
    ctx: typer.Context,
    scenario: ScenarioOpt = "benchmark-10",
    out: OutOpt = None,
    alpha: AlphaOpt = None,
    gamma: GammaOpt = None,
    mu1: Mu1Opt = None,
    noise_r: NoiseOpt = None,
    solver: SolverOpt = None,
    alpha_grid: Annotated[
        Optional[list[float]],
        typer.Option("--alpha-grid", help="Sweep these alpha values (repeatable)"),
    ] = None,
):
    """Synthesize the observer gain by semidefinite programming."""
    overrides = Overrides(alpha=alpha, gamma=gamma, mu1=mu1, noise_r=noise_r, solver=solver)
    synthesize_command(scenario, out, overrides, alpha_grid, quiet=_quiet(ctx))


@app.command()
def estimate(
    ctx: typer.Context,
    scenario: ScenarioOpt = "benchmark-10",
    out: OutOpt = None,
    estimator: Annotated[
        str, typer.Option("--estimator", "-e", help="observer or ukf")
    ] = "observer",
    gain: GainOpt = None,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    alpha: AlphaOpt = None,
    gamma: GammaOpt = None,
    mu1: Mu1Opt = None,
    noise_r: NoiseOpt = None,
    solver: SolverOpt = None,
):
    """Run one estimator and write its trace."""
    overrides = Overrides(
        seed=seed, horizon=horizon, alpha=alpha, gamma=gamma, mu1=mu1, noise_r=noise_r,
        solver=solver,
    )
    estimate_command(scenario, out, overrides, estimator, gain, quiet=_quiet(ctx))


@app.command()
def compare(
    ctx: typer.Context,
    scenario: ScenarioOpt = "benchmark-10",
    out: OutOpt = None,
    gain: GainOpt = None,
    replications: Annotated[
        int, typer.Option("--replications", "-r", help="Number of consecutive seeds")
    ] = 1,
    parallel: Annotated[
        bool, typer.Option("--parallel", help="Run the two estimators concurrently")
    ] = False,
    traces: Annotated[
        Optional[bool],
        typer.Option("--traces/--no-traces", help="Embed full traces in report.json"),
    ] = None,
    seed: SeedOpt = None,
    horizon: HorizonOpt = None,
    alpha: AlphaOpt = None,
    gamma: GammaOpt = None,
    mu1: Mu1Opt = None,
    noise_r: NoiseOpt = None,
    solver: SolverOpt = None,
):
    """Compare the observer with the unscented Kalman filter."""
    overrides = Overrides(
        seed=seed, horizon=horizon, alpha=alpha, gamma=gamma, mu1=mu1, noise_r=noise_r,
        solver=solver,
    )
    compare_command(
        scenario, out, overrides, gain, replications, parallel, traces, quiet=_quiet(ctx)
    )


@app.command()
def lipschitz(
    scenario: ScenarioOpt = "benchmark-10",
    out: OutOpt = None,
    samples: Annotated[
        int, typer.Option("--samples", "-n", min=2, help="Number of sampled pairs")
    ] = 100_000,
    seed: SeedOpt = None,
    gamma: GammaOpt = None,
):
    """Estimate the Lipschitz level of the nonlinearity by sampling."""
    lipschitz_command(scenario, out, Overrides(seed=seed, gamma=gamma), samples)


@app.command()
def config(
    key: str = typer.Argument(None, help="Config key (section.name)"),
    value: str = typer.Argument(None, help="Config value"),
    list_all: bool = typer.Option(False, "-l", "--list", help="List all config"),
    edit: bool = typer.Option(False, "-e", "--edit", help="Open in editor"),
):
    """Manage configuration."""
    config_command(key, value, list_all, edit)


def main_entry():
    """Entry point for CLI."""
    app()


if __name__ == "__main__":
    main_entry()
