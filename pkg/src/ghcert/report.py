"""Canonical JSON and CSV emission for reports.

Reports are byte-stable: keys are sorted, floats use the shortest repr that
round-trips, numpy scalars and arrays are converted to plain Python, and
non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["plain", "canonical_json", "envelope", "write_text", "csv_text", "file_digest"]


def plain(obj):
    """Recursively convert ``obj`` into JSON-ready builtins."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def envelope(command: str, config: dict, result, version: str) -> dict:
    return {"tool": "ghcert", "version": version, "command": command, "config": config, "result": result}


def write_text(path: str | None, text: str) -> None:
    """Write to ``path``, or to stdout when ``path`` is ``None`` or ``"-"``."""
    if path in (None, "-"):
        import sys

        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def file_digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
