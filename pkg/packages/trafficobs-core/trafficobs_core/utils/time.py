"""Timing utilities."""

import time
from typing import Optional


def format_duration(seconds: float) -> str:
    """
    Format seconds as a human-readable duration.

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted string (e.g., "850 ms", "3.42 s", "1:10:35")

    Examples:
        >>> format_duration(0.85)
        '850 ms'
        >>> format_duration(3.4219)
        '3.42 s'
        >>> format_duration(70.6)
        '1:10.6'
    """
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60:
        return f"{seconds:.2f} s"
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    secs = seconds % 60
    if hours > 0:
        return f"{hours}:{minutes:02d}:{int(secs):02d}"
    return f"{minutes}:{secs:04.1f}"


class Stopwatch:
    """Accumulating wall-clock timer.

    Examples:
        >>> watch = Stopwatch()
        >>> with watch:
        ...     pass
        >>> watch.elapsed >= 0
        True
    """

    def __init__(self) -> None:
        self.elapsed = 0.0
        self._started: Optional[float] = None

    def start(self) -> None:
        self._started = time.perf_counter()

    def stop(self) -> float:
        if self._started is not None:
            self.elapsed += time.perf_counter() - self._started
            self._started = None
        return self.elapsed

    def __enter__(self) -> "Stopwatch":
        self.start()
        return self

    def __exit__(self, *exc: object) -> None:
        self.stop()
