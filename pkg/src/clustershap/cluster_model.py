"""The prediction function explained by the Shapley engine: L1-normalized
Euclidean distances from a sample to every cluster centroid. Lower entries
mean closer to that centroid (better cohesion)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotation import ClusterAssignment
from .dataset import Dataset
from .errors import DimensionMismatch, TooFewClusters


@dataclass(frozen=True)
class CentroidSet:
    """K x m per-cluster means in the high-dimensional feature space."""

    centroids: np.ndarray
    dataset_id: str = ""

    def __post_init__(self):
        cents = np.ascontiguousarray(np.asarray(self.centroids, dtype=np.float64))
        if cents.ndim != 2 or cents.shape[0] < 2:
            raise TooFewClusters(f"need a K x m matrix with K >= 2, got shape {cents.shape}")
        cents.flags.writeable = False
        object.__setattr__(self, "centroids", cents)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def m(self) -> int:
        return self.centroids.shape[1]


def centroids(d: Dataset, a: ClusterAssignment) -> CentroidSet:
    """Mean of the member rows of each cluster; -1 rows are excluded."""
    if a.n != d.n:
        raise DimensionMismatch(f"assignment has {a.n} labels for a dataset of {d.n} rows")
    if a.k < 2:
        raise TooFewClusters(f"need at least 2 clusters, got {a.k}")
    cents = np.empty((a.k, d.m))
    for c in range(a.k):
        cents[c] = d.rows[a.labels == c].mean(axis=0)
    return CentroidSet(cents, d.id)


def cluster_probability(x: np.ndarray, cs: CentroidSet) -> np.ndarray:
    """Distance vector to the centroids, L1-normalized to sum to 1.

    A sample coinciding with every centroid (all distances zero) gets the
    uniform vector 1/K.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cs.m,):
        raise DimensionMismatch(f"expected a vector of length {cs.m}, got shape {x.shape}")
    return cluster_probabilities(x[None, :], cs)[0]


def cluster_probabilities(rows: np.ndarray, cs: CentroidSet) -> np.ndarray:
    """Row-wise cluster_probability for an (N, m) matrix; returns (N, K)."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != cs.m:
        raise DimensionMismatch(f"expected (N, {cs.m}) rows, got shape {rows.shape}")
    c = cs.centroids
    d2 = np.sum(rows * rows, axis=1)[:, None] + np.sum(c * c, axis=1)[None, :] - 2.0 * (rows @ c.T)
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)
    totals = dist.sum(axis=1)
    zero = totals == 0.0
    totals[zero] = 1.0
    probs = dist / totals[:, None]
    probs[zero] = 1.0 / cs.k
    return probs
