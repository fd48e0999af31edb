"""Shared command plumbing: scenario loading, output directories and exit codes."""

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Any, Iterator, Optional

import typer

from trafficobs_core.errors import InfeasibleSynthesisError, ScenarioError, TrafficObsError
from trafficobs_core.io.scenario_file import parse_scenario, read_scenario_document
from trafficobs_core.models.scenario import Scenario
from trafficobs_cli.config.settings import UserConfig, load_user_config, resolve_out_dir

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    OK = 0
    RUNTIME = 1
    PARSE = 2
    INFEASIBLE = 3


@dataclass
class Overrides:
    """Scenario overrides collected from the command line; None means unset."""

    seed: Optional[int] = None
    horizon: Optional[int] = None
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    mu1: Optional[float] = None
    noise_r: Optional[float] = None
    solver: Optional[str] = None
    workers: Optional[int] = None

    def as_dict(self) -> dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def fail(message: str, code: ExitCode) -> typer.Exit:
    typer.echo(f"Error: {message}", err=True)
    return typer.Exit(int(code))


def load_scenario_or_exit(
    source: str, overrides: Overrides, config: Optional[UserConfig] = None
) -> Scenario:
    """
    Load a scenario with overrides; parse problems exit with code 2.

    The user-config solver applies only when neither the flag nor the file names one.
    """
    config = config or load_user_config()
    values = overrides.as_dict()
    try:
        document = read_scenario_document(source)
        if "solver" not in values and "solver" not in document.get("synthesis", {}):
            values["solver"] = config.solver.name
        if "workers" not in values and config.solver.workers > 1:
            values["workers"] = config.solver.workers
        return parse_scenario(document, values)
    except ScenarioError as e:
        raise fail(str(e), ExitCode.PARSE) from e


def prepare_out_dir(out: Optional[str], config: Optional[UserConfig] = None) -> Path:
    """Resolve and create the output directory (call after the scenario parsed)."""
    path = resolve_out_dir(out, config)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise fail(f"Cannot create output directory {path}: {e}", ExitCode.RUNTIME) from e
    return path


@contextmanager
def exit_on_error() -> Iterator[None]:
    """Map library errors onto exit codes with a one-line diagnostic."""
    try:
        yield
    except typer.Exit:
        raise
    except ScenarioError as e:
        raise fail(str(e), ExitCode.PARSE) from e
    except InfeasibleSynthesisError as e:
        raise fail(f"Synthesis infeasible ({e.status}): {e}", ExitCode.INFEASIBLE) from e
    except TrafficObsError as e:
        logger.debug("Command failed", exc_info=True)
        raise fail(str(e), ExitCode.RUNTIME) from e
    except (OSError, ValueError) as e:
        logger.debug("Command failed", exc_info=True)
        raise fail(str(e), ExitCode.RUNTIME) from e


def warn_if_uncertified(gamma: Optional[float], gamma_hat: Optional[float]) -> None:
    """Print a warning when gamma is below the sampled Lipschitz level."""
    if gamma is None or gamma_hat is None or gamma >= gamma_hat:
        return
    typer.echo(
        f"Warning: gamma = {gamma:.4g} is below the sampled Lipschitz level "
        f"{gamma_hat:.4g}; the performance bound is not certified",
        err=True,
    )
