"""CSV datasets, JSON reports, sparse plan dumps and plot data.

Dataset CSVs have a header ``f0,...,f{d-1}`` and an optional final ``label``
column of integer class ids >= 1. Floats are written with ``repr`` so a
write/read cycle reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import IOFailureError, ParseError
from .ot_core import Dataset

PLAN_DUMP_THRESHOLD = 1e-12


def _parse_header(row, line) -> bool:
    """Validate the header and return whether it has a label column."""
    names = [c.strip() for c in row]
    has_label = bool(names) and names[-1] == "label"
    features = names[:-1] if has_label else names
    expected = [f"f{k}" for k in range(len(features))]
    if not features or features != expected:
        raise ParseError(f"missing or malformed header, expected f0..f{{d-1}}[,label], got {row!r}", line)
    return has_label


def _parse_float(cell, line) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite cell {cell!r}", line)
    return value


def _parse_label(cell, line) -> int:
    try:
        value = int(cell.strip())
    except ValueError:
        raise ParseError(f"label {cell!r} is not an integer", line) from None
    if value < 1:
        raise ParseError(f"label {value} must be >= 1", line)
    return value


def read_dataset(path) -> Dataset:
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise IOFailureError(f"{path}: {exc.strerror or exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file, missing header", 1)
        has_label = _parse_header(header, reader.line_num)
        width = len(header)
        points, labels = [], []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} columns, got {len(row)}", line)
            n_feat = width - 1 if has_label else width
            points.append([_parse_float(c, line) for c in row[:n_feat]])
            if has_label:
                labels.append(_parse_label(row[-1], line))
    if not points:
        raise ParseError("no data rows", reader.line_num + 1)
    return Dataset(np.array(points, dtype=float), np.array(labels, dtype=np.int64) if has_label else None)


def _open_for_write(path):
    path = Path(path)
    try:
        if path.parent != Path(""):
            path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="")
    except OSError as exc:
        raise IOFailureError(f"{path}: {exc.strerror or exc}") from exc


def write_dataset(dataset: Dataset, path, include_labels: bool = True) -> None:
    with_labels = include_labels and dataset.labels is not None
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([f"f{k}" for k in range(dataset.dim)] + (["label"] if with_labels else []))
        for i, row in enumerate(dataset.points):
            cells = [repr(float(v)) for v in row]
            if with_labels:
                cells.append(str(int(dataset.labels[i])))
            writer.writerow(cells)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def report_json(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    """JSON with sorted keys; non-finite numbers are refused."""
    text = report_json(report)
    with _open_for_write(path) as handle:
        handle.write(text)


def read_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IOFailureError(f"{path}: {exc.strerror or exc}") from exc


def write_plan(coupling, path, threshold: float = PLAN_DUMP_THRESHOLD) -> None:
    """Sparse ``i,j,mass`` triplets for the entries strictly above ``threshold``."""
    coupling = np.asarray(coupling, dtype=float)
    rows, cols = np.nonzero(coupling > threshold)
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["i", "j", "mass"])
        for i, j in zip(rows, cols):
            writer.writerow([int(i), int(j), repr(float(coupling[i, j]))])


def write_plot_data(target: Dataset, path, predicted_labels, mu_t, rejected) -> None:
    """Per-target CSV with the first two coordinates and the solver's verdicts.

    Missing ground truth is written as an empty ``true_label`` cell; 1D data
    gets ``y = 0``.
    """
    predicted_labels = np.asarray(predicted_labels)
    mu_t = np.asarray(mu_t, dtype=float)
    rejected = np.asarray(rejected, dtype=bool)
    pts = target.points
    with _open_for_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "y", "true_label", "predicted_label", "mu_t", "rejected"])
        for j in range(target.n):
            writer.writerow([
                repr(float(pts[j, 0])),
                repr(float(pts[j, 1])) if target.dim > 1 else "0.0",
                "" if target.labels is None else int(target.labels[j]),
                int(predicted_labels[j]),
                repr(float(mu_t[j])),
                int(rejected[j]),
            ])
