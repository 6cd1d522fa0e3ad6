"""CSV/JSON serialization of matrices, spectra, residual panels and reports.

Floats are written with 17 significant digits, which round-trips IEEE doubles
exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .errors import ParseError
from .residuals import ResidualPanel


def fmt(v: float) -> str:
    return f"{v:.17g}"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (pd.Timestamp, np.datetime64)):
        return pd.Timestamp(obj).strftime("%Y-%m-%d")
    return obj


def dump_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_matrix_csv(path, matrix, labels: Sequence[str]) -> None:
    """Row-major matrix with a header row of labels."""
    m = np.asarray(matrix, dtype=np.float64)
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(labels) + "\n")
        for row in m:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty matrix file", line=1)
    labels = rows[0]
    try:
        m = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if m.shape != (len(labels), len(labels)):
        raise ParseError(f"matrix shape {m.shape} does not match {len(labels)} labels")
    return m, labels


def matrix_to_json(matrix, labels: Sequence[str], **meta) -> str:
    return json.dumps({"labels": list(labels), "matrix": np.asarray(matrix).tolist(),
                       **_clean(meta)}, sort_keys=True)


def matrix_from_json(text: str) -> tuple[np.ndarray, list[str]]:
    d = json.loads(text)
    return np.array(d["matrix"], dtype=np.float64), d["labels"]


def write_heatmap_csv(path, matrix, row_labels: Sequence[str], col_labels: Sequence[str]) -> None:
    """Grid with a label column and a label header, for external plotting."""
    m = np.asarray(matrix, dtype=np.float64)
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(["", *col_labels]) + "\n")
        for lab, row in zip(row_labels, m):
            fh.write(",".join([lab, *(fmt(v) for v in row)]) + "\n")


def write_spectrum_csv(path, eigenvalues) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("rank,eigenvalue\n")
        for a, e in enumerate(np.asarray(eigenvalues, dtype=np.float64), start=1):
            fh.write(f"{a},{fmt(e)}\n")


def read_spectrum_csv(path) -> np.ndarray:
    df = pd.read_csv(path, float_precision="round_trip")
    return df["eigenvalue"].to_numpy(dtype=np.float64)


def write_residuals(path, res: ResidualPanel) -> None:
    """Residual CSV (date + one column per asset) and its config in a JSON sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(["date", *res.labels]) + "\n")
        for d, row in zip(res.dates, res.residuals):
            fh.write(d.strftime("%Y-%m-%d") + "," + ",".join(fmt(v) for v in row) + "\n")
    dump_json(path.with_suffix(".json"), res.config)


def read_residuals(path) -> ResidualPanel:
    path = Path(path)
    df = pd.read_csv(path, index_col=0, parse_dates=True, float_precision="round_trip")
    side = path.with_suffix(".json")
    config = json.loads(side.read_text()) if side.exists() else {}
    return ResidualPanel(df.to_numpy(dtype=np.float64), pd.DatetimeIndex(df.index),
                         tuple(df.columns), config)
