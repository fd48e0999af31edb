"""JSON output utilities."""

import json
from pathlib import Path
from typing import Any

import numpy as np


class JSONEncoder(json.JSONEncoder):
    """Encoder aware of numpy arrays, numpy scalars, paths and enums."""

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, Path):
            return str(obj)
        if hasattr(obj, "value"):
            return obj.value
        return super().default(obj)


def to_json(obj: Any, pretty: bool = True) -> str:
    """
    Convert object to JSON string.

    Args:
        obj: Object to convert
        pretty: Whether to format prettily

    Returns:
        JSON string
    """
    return json.dumps(obj, indent=2 if pretty else None, cls=JSONEncoder)


def write_json(obj: Any, path: Path, pretty: bool = True) -> None:
    """
    Write object to JSON file.

    Args:
        obj: Object to write
        path: Output file path
        pretty: Whether to format prettily
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(to_json(obj, pretty) + "\n")
