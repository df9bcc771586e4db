"""CSV ingestion and emission.

All files are UTF-8, comma separated, with a header line.  Floats are
written with 17 significant digits so results replay bit for bit.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .core import Dataset, DissimilarityMatrix, Partition, ValidationError, partition_from_labels, validate_dissimilarity

RESULT_COLUMNS = ("method", "k", "rep", "asw", "ari", "seconds", "converged")
SUMMARY_COLUMNS = ("dgp", "method", "mode", "mean_asw", "se_asw", "mean_ari", "se_ari", "ppr", "reps")


def fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else format(float(value), ".17g")
    return str(value)


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    return header, body


def _to_float(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ValidationError(f"{where}: not a number: {token!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{where}: non-finite value {token!r}")
    return value


def read_dataset(path) -> Dataset:
    """Coordinates with a header; optional ``id`` and ``label`` columns."""
    header, body = _read_rows(path)
    lower = [h.lower() for h in header]
    skip = {lower.index(c) for c in ("id",) if c in lower}
    label_col = lower.index("label") if "label" in lower else None
    if label_col is not None:
        skip.add(label_col)
    cols = [j for j in range(len(header)) if j not in skip]
    if not cols:
        raise ValidationError(f"{path}: no coordinate columns")
    pts = np.array([[_to_float(row[j], f"{path}:{i + 2}") for j in cols]
                    for i, row in enumerate(body)])
    if pts.size == 0:
        raise ValidationError(f"{path}: no data rows")
    labels = None
    if label_col is not None:
        labels = partition_from_labels([int(_to_float(row[label_col], str(path))) for row in body])
    return Dataset(pts, labels, meta={"columns": [header[j] for j in cols], "source": str(path)})


def read_dissimilarity(path) -> DissimilarityMatrix:
    """Full square matrix with a leading id column and a header of ids."""
    header, body = _read_rows(path)
    n = len(header) - 1
    if len(body) != n:
        raise ValidationError(f"{path}: {len(body)} rows for {n} columns")
    values = np.array([[_to_float(tok, f"{path}:{i + 2}") for tok in row[1:]]
                       for i, row in enumerate(body)])
    try:
        return validate_dissimilarity(values)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def read_ids(path) -> list[str]:
    header, body = _read_rows(path)
    return [row[0] for row in body]


def read_labels(path) -> Partition:
    header, body = _read_rows(path)
    if [h.lower() for h in header] != ["id", "label"]:
        raise ValidationError(f"{path}: expected header 'id,label'")
    return partition_from_labels([int(_to_float(row[1], f"{path}:{i + 2}"))
                                  for i, row in enumerate(body)])


def write_partition(path, partition: Partition, ids: Optional[Iterable] = None) -> None:
    ids = list(ids) if ids is not None else list(range(1, partition.n + 1))
    if len(ids) != partition.n:
        raise ValidationError("ids and partition differ in length")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"])
        w.writerows(zip(ids, partition.labels.tolist()))


def write_dissimilarity(path, d, ids: Optional[Iterable] = None) -> None:
    d = np.asarray(d)
    ids = list(ids) if ids is not None else list(range(1, d.shape[0] + 1))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *ids])
        for i, row in zip(ids, d):
            w.writerow([i, *(fmt(float(x)) for x in row)])


def write_dataset(path, data: Dataset) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"x{j + 1}" for j in range(data.p)]
        w.writerow(header + (["label"] if data.labels is not None else []))
        for i, row in enumerate(data.points):
            extra = [int(data.labels.labels[i])] if data.labels is not None else []
            w.writerow([fmt(float(x)) for x in row] + extra)


def write_table(path, columns, rows) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def write_results(path, rows: Iterable[dict]) -> None:
    """One row per (method, k, rep): ``method,k,rep,asw,ari,seconds,converged``.

    Extra keys in the row dicts are ignored.
    """
    write_table(path, RESULT_COLUMNS, rows)


def write_summary(path, rows: Iterable[dict]) -> None:
    write_table(path, SUMMARY_COLUMNS, rows)
