"""Canonical JSON serialization and atomic file writes.

All artifacts the engine emits go through these helpers so that a fixed
input always produces byte-identical output: keys are sorted, floats are
rounded to 12 significant digits, and files are written via a temp file
plus rename.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any


def round_floats(obj: Any) -> Any:
    """Recursively round every float to 12 significant digits."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float in artifact: {obj!r}")
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text to `path` atomically (temp file in same dir + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: str | Path, obj: Any) -> None:
    atomic_write_text(path, canonical_json(obj))


def read_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
