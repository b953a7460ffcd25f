"""2-D visual-space coordinates: external files or a PCA baseline."""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DegenerateData, MissingFile, NonNumericCell, ParseError, RowCountMismatch

_EIG_DIRECT_MAX_M = 64
_POWER_TOL = 1e-9
_POWER_MAX_ITER = 10_000


@dataclass(frozen=True)
class Embedding:
    """n x 2 coordinates paired to a Dataset by row order."""

    coords: np.ndarray
    dataset_id: str
    method_tag: str = "external"

    def __post_init__(self):
        coords = np.ascontiguousarray(np.asarray(self.coords, dtype=np.float64))
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ParseError(0, 0, f"embedding must be n x 2, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            bad = np.argwhere(~np.isfinite(coords))[0]
            raise NonNumericCell(int(bad[0]) + 1, int(bad[1]) + 1, "non-finite embedding coordinate")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


def load_embedding(path: str, d: Dataset) -> Embedding:
    """Read a headerless 2-column CSV whose row i pairs with Dataset row i."""
    if not os.path.isfile(path):
        raise MissingFile(path)
    coords: list[list[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if len(row) != 2:
                raise ParseError(line_no, min(len(row), 2) + 1, f"line {line_no}: expected 2 columns, got {len(row)}")
            pair = []
            for col_no, cell in enumerate(row, start=1):
                try:
                    v = float(cell.strip())
                except ValueError:
                    raise NonNumericCell(line_no, col_no, f"line {line_no}, column {col_no}: {cell!r} is not a number") from None
                if not math.isfinite(v):
                    raise NonNumericCell(line_no, col_no, f"line {line_no}, column {col_no}: non-finite")
                pair.append(v)
            coords.append(pair)
    if len(coords) != d.n:
        raise RowCountMismatch(d.n, len(coords))
    return Embedding(np.array(coords, dtype=np.float64), d.id, "external")


def pca_embed(d: Dataset) -> Embedding:
    """Project onto the top-2 principal components of the mean-centered matrix.

    Deterministic sign convention: each component's largest-magnitude entry is
    made nonnegative. Covariance eigendecomposition for m <= 64, otherwise a
    seeded power method with deflation (tolerance 1e-9). Rank-deficient input
    (rank < 2) emits a DegenerateData warning and zero-fills the second axis.
    """
    if d.n < 2 or d.m < 2:
        raise ValueError(f"pca_embed needs n >= 2 and m >= 2, got n={d.n}, m={d.m}")
    centered = d.rows - d.rows.mean(axis=0)
    if d.m <= _EIG_DIRECT_MAX_M:
        cov = centered.T @ centered / (d.n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        comps = eigvecs[:, ::-1][:, :2].T.copy()
        lams = eigvals[::-1][:2].copy()
    else:
        comps, lams = _power_components(centered)

    scale = max(float(lams[0]), 0.0)
    degenerate = scale <= 0.0 or float(lams[1]) <= 1e-12 * scale
    for i in range(2):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    coords = centered @ comps.T
    if degenerate:
        coords[:, 1] = 0.0
        if scale <= 0.0:
            coords[:, 0] = 0.0
        warnings.warn("input has rank < 2; second embedding axis is all zeros", DegenerateData)
    return Embedding(coords, d.id, "pca")


def _power_components(centered: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Top-2 eigenpairs of the covariance via power iteration with deflation;
    works through matvecs so the m x m covariance is never materialized."""
    n, m = centered.shape
    rng = np.random.default_rng(0)
    comps = np.zeros((2, m))
    lams = np.zeros(2)

    def matvec(v: np.ndarray) -> np.ndarray:
        return centered.T @ (centered @ v) / (n - 1)

    for i in range(2):
        v = rng.standard_normal(m)
        for prev in comps[:i]:
            v -= (v @ prev) * prev
        norm = np.linalg.norm(v)
        v = v / norm if norm > 0 else np.ones(m) / math.sqrt(m)
        lam = 0.0
        for _ in range(_POWER_MAX_ITER):
            w = matvec(v)
            for prev in comps[:i]:
                w -= (w @ prev) * prev
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                lam = 0.0
                break
            w /= norm
            if w @ v < 0:
                w = -w
            done = np.abs(w - v).max() < _POWER_TOL
            v = w
            lam = norm
            if done:
                break
        comps[i] = v
        lams[i] = lam
    return comps, lams
