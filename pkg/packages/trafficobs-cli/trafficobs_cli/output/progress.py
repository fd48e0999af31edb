"""Progress bar utilities."""

from contextlib import contextmanager
from typing import Iterator, Optional

from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskID,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)

console = Console(stderr=True)


class ProgressBar:
    """Wrapper for Rich progress bar."""

    def __init__(self, progress: Progress, task_id: TaskID):
        self.progress = progress
        self.task_id = task_id

    def update(self, value: float, description: Optional[str] = None) -> None:
        """
        Update progress.

        Args:
            value: Progress value
            description: Optional new description
        """
        if description:
            self.progress.update(self.task_id, completed=value, description=description)
        else:
            self.progress.update(self.task_id, completed=value)

    def stage_callback(self, stage: str, percent: float, message: str) -> None:
        """Pipeline progress callback: (stage, overall percent, message)."""
        self.update(percent, description=message or f"Finished {stage}")


@contextmanager
def progress_bar(
    description: str = "Running...",
    total: Optional[float] = 100,
    enabled: bool = True,
) -> Iterator[ProgressBar]:
    """
    Create a progress bar context manager.

    Args:
        description: Description text
        total: Total value (100 for percentage)
        enabled: Hide the bar entirely when False (quiet mode)

    Yields:
        ProgressBar object
    """
    progress = Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        console=console,
        disable=not enabled,
        transient=True,
    )

    with progress:
        task = progress.add_task(description, total=total)
        yield ProgressBar(progress, task)
