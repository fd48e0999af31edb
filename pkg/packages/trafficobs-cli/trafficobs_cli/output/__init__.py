"""Output formatting utilities."""

from trafficobs_cli.output.json import to_json, write_json
from trafficobs_cli.output.logging import setup_logging
from trafficobs_cli.output.progress import ProgressBar, progress_bar
from trafficobs_cli.output.table import print_table

__all__ = [
    "print_table",
    "progress_bar",
    "ProgressBar",
    "to_json",
    "write_json",
    "setup_logging",
]
