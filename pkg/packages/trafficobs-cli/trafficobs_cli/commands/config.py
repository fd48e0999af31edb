"""Config command."""

import json
import subprocess
from dataclasses import asdict, fields, is_dataclass
from typing import Any, Optional

import typer

from trafficobs_cli.config.settings import (
    UserConfig,
    get_config_path,
    load_user_config,
    save_user_config,
)


def _coerce(current: Any, value: str) -> Any:
    """Parse a command-line value into the type of the current setting."""
    if isinstance(current, bool):
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"Expected a boolean, got '{value}'")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, str):
        return value.upper() if current.isupper() else value
    return json.loads(value)


def config_command(
    key: Optional[str] = None,
    value: Optional[str] = None,
    list_all: bool = False,
    edit: bool = False,
) -> None:
    """
    Manage CLI configuration.

    Examples:
        trafficobs config                          # Show all config
        trafficobs config --list                   # List all config
        trafficobs config output.dir ./runs        # Default output directory
        trafficobs config solver.name SCS          # Default conic solver
        trafficobs config logging.level DEBUG      # Default log level
    """
    config = load_user_config()

    if edit:
        config_path = get_config_path()
        config_path.parent.mkdir(parents=True, exist_ok=True)
        if not config_path.exists():
            save_user_config(config)
        editor = typer.get_editor() or "vi"
        subprocess.call([editor, str(config_path)])
        return

    if list_all or not key:
        _print_config(config)
        return

    # Parse key (dot notation: section.name)
    parts = key.split(".")
    if len(parts) != 2:
        typer.echo(f"Error: Unknown key '{key}' (expected section.name)", err=True)
        raise typer.Exit(1)
    section_name, final_key = parts

    section = getattr(config, section_name, None)
    if not is_dataclass(section) or final_key not in {f.name for f in fields(section)}:
        typer.echo(f"Error: Unknown key '{key}'", err=True)
        raise typer.Exit(1)

    if value is None:
        typer.echo(getattr(section, final_key))
        return

    try:
        setattr(section, final_key, _coerce(getattr(section, final_key), value))
        save_user_config(config)
    except ValueError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(1) from e
    typer.echo(f"Set {key} = {getattr(section, final_key)}")


def _print_config(config: UserConfig) -> None:
    """Pretty print configuration."""
    from trafficobs_cli.output.table import print_table

    rows = [
        [f"{section}.{name}", str(value)]
        for section, values in asdict(config).items()
        for name, value in values.items()
    ]
    rows.append(["(file)", str(get_config_path())])
    print_table(["Key", "Value"], rows)
