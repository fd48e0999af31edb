"""User settings management."""

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

OUT_DIR_ENV = "TRAFFICOBS_OUT_DIR"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
SOLVERS = ("CLARABEL", "SCS")


@dataclass
class OutputSettings:
    dir: str = "./output"
    figures: bool = True  # write the plot-ready CSV series with compare
    traces: bool = False  # embed full traces in report.json


@dataclass
class SolverSettings:
    name: str = "CLARABEL"
    workers: int = 1


@dataclass
class LoggingSettings:
    level: str = "INFO"


@dataclass
class UserConfig:
    """Defaults applied to every command unless a flag overrides them."""

    output: OutputSettings = field(default_factory=OutputSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)

    def validate(self) -> None:
        if self.solver.name not in SOLVERS:
            raise ValueError(f"solver.name must be one of {', '.join(SOLVERS)}")
        if self.solver.workers < 1:
            raise ValueError("solver.workers must be at least 1")
        if self.logging.level not in LOG_LEVELS:
            raise ValueError(f"logging.level must be one of {', '.join(LOG_LEVELS)}")


def get_config_path() -> Path:
    """Get user config file path."""
    config_dir = Path.home() / ".trafficobs"
    return config_dir / "config.json"


def get_default_config() -> UserConfig:
    """Get default configuration."""
    return UserConfig()


def load_user_config() -> UserConfig:
    """
    Load user configuration from file.

    Unknown keys are ignored so older files keep loading.

    Returns:
        UserConfig (default if file doesn't exist)
    """
    config_path = get_config_path()
    config = get_default_config()

    if not config_path.exists():
        return config

    with open(config_path) as f:
        data = json.load(f)

    for section_name, section in asdict(config).items():
        saved = data.get(section_name, {})
        target = getattr(config, section_name)
        for key in section:
            if key in saved:
                setattr(target, key, saved[key])

    return config


def save_user_config(config: UserConfig) -> None:
    """
    Save user configuration to file.

    Args:
        config: UserConfig to save
    """
    config.validate()
    config_path = get_config_path()
    config_path.parent.mkdir(parents=True, exist_ok=True)

    with open(config_path, "w") as f:
        json.dump(asdict(config), f, indent=2)


def resolve_out_dir(out: Optional[str], config: Optional[UserConfig] = None) -> Path:
    """Output directory: --out, then $TRAFFICOBS_OUT_DIR, then the user config."""
    if out:
        return Path(out)
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return Path(env)
    return Path((config or load_user_config()).output.dir)
