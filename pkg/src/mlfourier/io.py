"""Plain-text and binary serialization helpers.

Floats are written with 17 significant digits, which round-trips every IEEE
double exactly.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def write_rows(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    """Write a CSV file, formatting floats with 17 significant digits."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )


def write_complex_csv(
    path: str | Path,
    leading: Sequence[str],
    columns: np.ndarray,
    values: np.ndarray,
) -> None:
    """Write ``leading`` columns followed by ``re,im`` of ``values``."""
    columns = np.asarray(columns)
    values = np.asarray(values, dtype=complex).ravel()
    rows = [
        [*(c.item() for c in cols), float(v.real), float(v.imag)]
        for cols, v in zip(columns, values)
    ]
    write_rows(path, [*leading, "re", "im"], rows)


def read_complex_csv(
    path: str | Path, leading: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`write_complex_csv`."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        expected = [*leading, "re", "im"]
        if header != expected:
            raise ValueError(f"unexpected CSV header {header}, expected {expected}")
        rows = [[float(x) for x in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(expected))
    n = len(leading)
    return data[:, :n], data[:, n] + 1j * data[:, n + 1]


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj: Any) -> str:
    """Deterministic JSON (sorted keys; non-finite floats as strings)."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)
