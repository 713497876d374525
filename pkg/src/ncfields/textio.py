"""Deterministic text formats: numeric grids, CSV tables and key-value records."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence

import numpy as np


def format_float(x: float) -> str:
    """Shortest round-trip representation (at most 17 significant digits)."""
    x = float(x)
    if x == 0.0:
        return "0.0"
    return repr(x)


def format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def format_matrix(matrix: np.ndarray) -> str:
    """Row-major, space-separated grid with 17 significant digits."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [" ".join("%.17g" % (v + 0.0) for v in row) for row in matrix]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if len({len(r) for r in rows}) > 1:
        raise ValueError("ragged numeric grid")
    return np.array([[float(v) for v in r] for r in rows])


def to_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def to_json(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    def clean(v: object) -> object:
        if isinstance(v, (np.floating, float)):
            v = float(v)
            return v if math.isfinite(v) else str(v)
        if isinstance(v, np.integer):
            return int(v)
        if isinstance(v, np.bool_):
            return bool(v)
        return v

    records = [{k: clean(v) for k, v in zip(header, row)} for row in rows]
    return json.dumps(records, indent=1, sort_keys=False) + "\n"


def format_table(header: Sequence[str], rows: Iterable[Sequence[object]], fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(header, rows)
    if fmt == "json":
        return to_json(header, rows)
    raise ValueError(f"unknown format {fmt!r}")


def format_record(fields: Mapping[str, object]) -> str:
    """Flat ``key=value`` text, one pair per line, in insertion order."""
    return "".join(f"{k}={format_value(v)}\n" for k, v in fields.items())


def parse_record(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
