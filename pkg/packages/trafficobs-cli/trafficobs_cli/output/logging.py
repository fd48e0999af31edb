"""Log rendering for the command line."""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

err_console = Console(stderr=True)


def setup_logging(level: str = "INFO", console: Optional[Console] = None) -> None:
    """Route library log records through a single RichHandler on the root logger."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)
    root.addHandler(
        RichHandler(console=console or err_console, show_path=False, rich_tracebacks=False)
    )
    root.setLevel(level)
    # solver chatter stays out of INFO output
    logging.getLogger("cvxpy").setLevel(max(logging.WARNING, root.level))
