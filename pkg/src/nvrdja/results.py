"""Tabular experiment results and their bit-stable CSV / JSON forms."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class ExperimentResult:
    kind: str
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def to_csv_text(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def to_json_text(result: ExperimentResult) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": result.kind,
        "columns": list(result.columns),
        "rows": _jsonable(result.rows),
        "metadata": _jsonable(result.metadata),
        "config": _jsonable(result.config),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(path, text):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def emit_plot_data(result: ExperimentResult, path) -> Path:
    """Plot-ready CSV: header row, 12 significant digits, ``\\n`` line endings."""
    return _write(path, to_csv_text(result))


def emit_json(result: ExperimentResult, path) -> Path:
    return _write(path, to_json_text(result))


def read_series_csv(path):
    """Two-column CSV (time ns, value) with a header row -> (times, values)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    data = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r], dtype=float)
    return data[:, 0], data[:, 1]
