"""Tabular dataset ingestion, validation and scaling."""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateFeatureName,
    EmptyDataset,
    MissingFile,
    NonNumericCell,
    ParseError,
)

STANDARDIZE_POLICIES = ("none", "zscore", "minmax")


@dataclass(frozen=True)
class Dataset:
    """Immutable n x m numeric matrix with named columns.

    rows are float64 and guaranteed finite; feature_names are unique;
    ground_truth (optional) holds one integer label per row, with
    label_names mapping those integers back to the raw label strings.
    id is a content hash over the matrix bytes and the feature names.
    """

    rows: np.ndarray
    feature_names: tuple[str, ...]
    ground_truth: np.ndarray | None = None
    label_names: tuple[str, ...] | None = None
    id: str = field(default="", compare=False)

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.float64))
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
            raise EmptyDataset(f"need a non-empty 2-D matrix, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            bad = np.argwhere(~np.isfinite(rows))[0]
            raise NonNumericCell(int(bad[0]) + 1, int(bad[1]) + 1, "non-finite value in matrix")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != rows.shape[1]:
            raise EmptyDataset(f"{len(names)} feature names for {rows.shape[1]} columns")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateFeatureName(", ".join(dupes))
        gt = self.ground_truth
        if gt is not None:
            gt = np.ascontiguousarray(np.asarray(gt, dtype=np.int64))
            if gt.shape != (rows.shape[0],):
                raise EmptyDataset(f"ground_truth length {gt.shape} does not match n={rows.shape[0]}")
            gt.flags.writeable = False
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "ground_truth", gt)
        if self.label_names is not None:
            object.__setattr__(self, "label_names", tuple(str(n) for n in self.label_names))
        if not self.id:
            object.__setattr__(self, "id", _content_hash(rows, names))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def m(self) -> int:
        return self.rows.shape[1]


def _content_hash(rows: np.ndarray, names: tuple[str, ...]) -> str:
    h = hashlib.sha256()
    h.update(rows.tobytes())
    h.update("\x1f".join(names).encode("utf-8"))
    return h.hexdigest()[:16]


def load_dataset(path: str, label_column: str | None = None, delimiter: str = ",") -> Dataset:
    """Read a headed CSV into a Dataset.

    The named label_column, when present, is removed from the matrix and its
    values become integer ground-truth labels (distinct values numbered by
    first appearance; purely integer columns keep their literal values).
    Row order is preserved. Any missing or non-numeric feature cell is an
    error identifying the file line and column, both 1-based.
    """
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise ValueError(f"label column {label_column!r} not in header {header}")
            label_idx = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_idx]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateFeatureName(", ".join(dupes))

        matrix: list[list[float]] = []
        raw_labels: list[str] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue  # tolerate blank lines
            if len(row) != len(header):
                col = min(len(row), len(header)) + 1
                raise ParseError(line_no, col, f"line {line_no}: expected {len(header)} cells, got {len(row)}")
            vals = []
            for col_no, cell in enumerate(row, start=1):
                if col_no - 1 == label_idx:
                    raw_labels.append(cell.strip())
                    continue
                text = cell.strip()
                if text == "":
                    raise ParseError(line_no, col_no, f"line {line_no}, column {col_no}: missing cell")
                try:
                    v = float(text)
                except ValueError:
                    raise NonNumericCell(line_no, col_no, f"line {line_no}, column {col_no}: {cell!r} is not a number") from None
                if not math.isfinite(v):
                    raise NonNumericCell(line_no, col_no, f"line {line_no}, column {col_no}: {cell!r} is not finite")
                vals.append(v)
            matrix.append(vals)

    if not matrix:
        raise EmptyDataset(f"{path} has a header but no data rows")
    if not names:
        raise EmptyDataset(f"{path} has no feature columns")

    ground_truth = None
    label_names = None
    if label_idx is not None:
        ground_truth, label_names = _encode_labels(raw_labels)
    return Dataset(np.array(matrix, dtype=np.float64), tuple(names), ground_truth, label_names)


def _encode_labels(raw: list[str]) -> tuple[np.ndarray, tuple[str, ...] | None]:
    try:
        ints = [int(s) for s in raw]
    except ValueError:
        pass
    else:
        return np.array(ints, dtype=np.int64), None
    seen: dict[str, int] = {}
    codes = []
    for s in raw:
        if s not in seen:
            seen[s] = len(seen)
        codes.append(seen[s])
    return np.array(codes, dtype=np.int64), tuple(seen)


def save_dataset(d: Dataset, path: str, label_column: str = "label", delimiter: str = ",") -> None:
    """Write a Dataset back to CSV; floats use repr so a reload is bit-exact."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        header = list(d.feature_names)
        if d.ground_truth is not None:
            header.append(label_column)
        writer.writerow(header)
        for i in range(d.n):
            row = [repr(float(v)) for v in d.rows[i]]
            if d.ground_truth is not None:
                code = int(d.ground_truth[i])
                row.append(d.label_names[code] if d.label_names is not None else str(code))
            writer.writerow(row)


def standardize(d: Dataset, policy: str = "none") -> Dataset:
    """Rescale features: none (identity), zscore (mean 0 / unit variance,
    population std) or minmax (onto [0, 1]). Exactly-constant columns map
    to all-zero under both non-trivial policies."""
    if policy not in STANDARDIZE_POLICIES:
        raise ValueError(f"unknown standardize policy {policy!r}; expected one of {STANDARDIZE_POLICIES}")
    if policy == "none":
        return d
    rows = d.rows.copy()
    constant = np.all(rows == rows[0, :], axis=0)
    if policy == "zscore":
        mean = rows.mean(axis=0)
        std = rows.std(axis=0)
        std[constant] = 1.0
        rows = (rows - mean) / std
    else:
        lo = rows.min(axis=0)
        rng = rows.max(axis=0) - lo
        rng[constant] = 1.0
        rows = (rows - lo) / rng
    rows[:, constant] = 0.0
    return Dataset(rows, d.feature_names, d.ground_truth, d.label_names)
