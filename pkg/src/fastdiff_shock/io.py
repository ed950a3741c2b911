"""Deterministic CSV and JSON writers (17 significant digits)."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % float(value)
    return str(value)


def write_rows(path: str | Path, columns, rows) -> Path:
    """Write dict rows with a fixed column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_columns(path: str | Path, data: dict) -> Path:
    """Write equal-length arrays as CSV columns, in dict order."""
    cols = list(data)
    arrays = [np.asarray(data[c]) for c in cols]
    n = len(arrays[0])
    rows = ({c: a[i] for c, a in zip(cols, arrays)} for i in range(n))
    return write_rows(path, cols, rows)


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    cols = lines[0].split(",")
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    values = values.reshape(-1, len(cols))
    return {c: values[:, i] for i, c in enumerate(cols)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def snapshot_name(t: float) -> str:
    return f"snapshot_{t:g}.csv"
