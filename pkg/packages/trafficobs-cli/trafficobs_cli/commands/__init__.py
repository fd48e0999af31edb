"""CLI commands."""

from trafficobs_cli.commands.compare import compare_command
from trafficobs_cli.commands.config import config_command
from trafficobs_cli.commands.estimate import estimate_command
from trafficobs_cli.commands.lipschitz import lipschitz_command
from trafficobs_cli.commands.simulate import simulate_command
from trafficobs_cli.commands.synthesize import synthesize_command

__all__ = [
    "simulate_command",
    "synthesize_command",
    "estimate_command",
    "compare_command",
    "lipschitz_command",
    "config_command",
]
