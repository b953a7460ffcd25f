"""Cluster annotation: ground-truth labels, clustering of the embedding,
or manual lasso polygons. Label -1 marks points assigned to no cluster."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .embedding import Embedding
from .errors import (
    BadK,
    DegeneratePolygon,
    EmptyCluster,
    MissingLabels,
    MissingPolygons,
    NonContiguousClusterIds,
)
from .seriation import cut_tree, linkage_matrix

METHODS = ("labeled", "clustering", "manual")
KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-row integer cluster labels in {-1} + [0, k); every id in [0, k)
    has at least one member."""

    labels: np.ndarray
    k: int
    method: str

    def __post_init__(self):
        labels = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if labels.ndim != 1:
            raise BadK(f"labels must be 1-D, got shape {labels.shape}")
        if self.k < 1:
            raise BadK(f"need k >= 1, got {self.k}")
        present = np.unique(labels)
        if present.size and (present[0] < -1 or present[-1] >= self.k):
            raise BadK(f"labels outside {{-1}} U [0, {self.k})")
        missing = [c for c in range(self.k) if not np.any(labels == c)]
        if missing:
            raise EmptyCluster(f"cluster ids with no members: {missing}")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class LassoPolygon:
    """Closed polygon in embedding coordinates (last vertex joins the first)."""

    vertices: np.ndarray
    cluster_id: int

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise DegeneratePolygon(f"polygon needs >= 3 (x, y) vertices, got shape {verts.shape}")
        if not np.all(np.isfinite(verts)):
            raise DegeneratePolygon("polygon vertices must be finite")
        verts.flags.writeable = False
        object.__setattr__(self, "vertices", verts)


def annotate(
    d: Dataset,
    e: Embedding | None,
    method: str,
    *,
    k: int | None = None,
    algorithm: str = "kmeans",
    linkage: str = "average",
    seed: int = 0,
    polygons: list[LassoPolygon] | None = None,
) -> ClusterAssignment:
    """Dispatch to one of the three annotation paths.

    labeled: relabel d.ground_truth to contiguous ids by first appearance
    (no embedding needed). clustering: run kmeans/agglomerative on the 2-D
    embedding. manual: assign by lasso polygons.
    """
    if method not in METHODS:
        raise ValueError(f"unknown annotation method {method!r}; expected one of {METHODS}")
    if method == "labeled":
        if d.ground_truth is None:
            raise MissingLabels("dataset has no ground-truth labels")
        return ClusterAssignment(*_relabel_first_appearance(d.ground_truth), method="labeled")
    if e is None:
        raise ValueError(f"method {method!r} requires an embedding")
    if e.n != d.n:
        raise ValueError(f"embedding has {e.n} rows for a dataset of {d.n}")
    if method == "clustering":
        if algorithm == "kmeans":
            labels = kmeans(e, _require_k(k, e.n), seed)
        elif algorithm == "agglomerative":
            labels = agglomerative(e, _require_k(k, e.n), linkage)
        else:
            raise ValueError(f"unknown clustering algorithm {algorithm!r}")
        return ClusterAssignment(labels, int(labels.max()) + 1, method="clustering")
    if not polygons:
        raise MissingPolygons("manual annotation needs at least one polygon")
    return lasso_assign(e, polygons)


def _require_k(k: int | None, n: int) -> int:
    if k is None or not (2 <= k <= n):
        raise BadK(f"k must satisfy 2 <= k <= {n}, got {k}")
    return int(k)


def _relabel_first_appearance(values: np.ndarray) -> tuple[np.ndarray, int]:
    seen: dict[int, int] = {}
    out = np.empty(values.shape[0], dtype=np.int64)
    for i, v in enumerate(values):
        v = int(v)
        if v not in seen:
            seen[v] = len(seen)
        out[i] = seen[v]
    return out, len(seen)


def kmeans(e: Embedding, k: int, seed: int = 0) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding on the 2-D embedding.

    Stops when no assignment changes or after 300 iterations; deterministic
    under seed. An empty cluster is repaired by stealing the point farthest
    from its own centroid (from clusters that can spare one).
    """
    labels, _ = _kmeans_trace(e, k, seed)
    return labels


def _kmeans_trace(e: Embedding, k: int, seed: int) -> tuple[np.ndarray, list[float]]:
    pts = e.coords
    n = pts.shape[0]
    if not (2 <= k <= n):
        raise BadK(f"k must satisfy 2 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(pts, k, rng)
    prev = None
    objectives: list[float] = []
    for _ in range(KMEANS_MAX_ITER):
        d2 = _sq_distances(pts, centroids)
        labels = np.argmin(d2, axis=1)
        labels = _repair_empty(pts, labels, centroids, k)
        if prev is not None and np.array_equal(labels, prev):
            break
        prev = labels
        for c in range(k):
            centroids[c] = pts[labels == c].mean(axis=0)
        objectives.append(float(np.sum((pts - centroids[labels]) ** 2)))
    return labels.astype(np.int64), objectives


def _kmeanspp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = pts.shape[0]
    centroids = np.empty((k, 2))
    centroids[0] = pts[rng.integers(n)]
    closest = np.sum((pts - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centroids[c] = pts[idx]
        closest = np.minimum(closest, np.sum((pts - centroids[c]) ** 2, axis=1))
    return centroids


def _sq_distances(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = pts[:, None, :] - centroids[None, :, :]
    return np.sum(diff * diff, axis=2)


def _repair_empty(pts: np.ndarray, labels: np.ndarray, centroids: np.ndarray, k: int) -> np.ndarray:
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels[labels >= 0], minlength=k)
        own_dist = np.sum((pts - centroids[labels]) ** 2, axis=1)
        own_dist[counts[labels] <= 1] = -np.inf  # do not empty a singleton donor
        labels[int(np.argmax(own_dist))] = c
    return labels


def agglomerative(e: Embedding, k: int, linkage: str = "average") -> np.ndarray:
    """Hierarchical merge on Euclidean distances in the plane, cut at k."""
    n = e.n
    if not (2 <= k <= n):
        raise BadK(f"k must satisfy 2 <= k <= {n}, got {k}")
    Z = linkage_matrix(e.coords, linkage)
    return cut_tree(Z, n, k)


def lasso_assign(e: Embedding, polygons: list[LassoPolygon]) -> ClusterAssignment:
    """Assign each embedded point by even-odd ray casting.

    A point on a polygon edge counts as inside; a point inside several
    polygons goes to the smallest cluster_id; points in no polygon get -1.
    cluster_ids must form a contiguous set 0..K-1, and every cluster must
    capture at least one point.
    """
    if not polygons:
        raise MissingPolygons("need at least one polygon")
    ids = sorted({p.cluster_id for p in polygons})
    if ids != list(range(len(ids))):
        raise NonContiguousClusterIds(f"cluster ids {ids} are not contiguous from 0")
    k = len(ids)
    labels = np.full(e.n, -1, dtype=np.int64)
    for poly in sorted(polygons, key=lambda p: p.cluster_id):
        unassigned = labels == -1
        if not np.any(unassigned):
            break
        inside = _points_in_polygon(e.coords[unassigned], poly.vertices)
        idx = np.flatnonzero(unassigned)[inside]
        labels[idx] = poly.cluster_id
    empty = [c for c in range(k) if not np.any(labels == c)]
    if empty:
        raise EmptyCluster(f"polygons for cluster ids {empty} contain no points")
    return ClusterAssignment(labels, k, method="manual")


def _points_in_polygon(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Vectorized even-odd rule with an on-edge test (edge counts as inside)."""
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    x1 = verts[:, 0][None, :]
    y1 = verts[:, 1][None, :]
    x2 = np.roll(verts[:, 0], -1)[None, :]
    y2 = np.roll(verts[:, 1], -1)[None, :]

    scale = max(1.0, float(np.abs(verts).max()))
    eps = 1e-12 * scale

    cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
    within_x = (x >= np.minimum(x1, x2) - eps) & (x <= np.maximum(x1, x2) + eps)
    within_y = (y >= np.minimum(y1, y2) - eps) & (y <= np.maximum(y1, y2) + eps)
    on_edge = np.any((np.abs(cross) <= eps * scale) & within_x & within_y, axis=1)

    straddles = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_int = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    crossings = np.sum(straddles & (x_int > x), axis=1)
    return on_edge | (crossings % 2 == 1)
