"""Serializable visual-summary artifacts derived from an ExplanationMatrix:
interleaved tooltip histograms, dot plots, aggregated KDE bins, the
Importance Summary and the leaf-ordered Importance Heatmap.

Every function here is a pure transformation returning JSON-ready dicts;
rendering is the UI's job.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BadCluster, EmptyCluster, TooFewClusters
from .seriation import (
    adjacent_distance_sum,
    linkage_matrix,
    natural_leaf_order,
    optimal_leaf_order,
    pairwise_distances,
)
from .shapley import ExplanationMatrix

TOP_FEATURES_CAP = 4
DEFAULT_HISTOGRAM_BINS = 20
DEFAULT_KDE_BINS = 5
KDE_CURVE_POINTS = 64
KDE_BANDWIDTH_FLOOR_FRACTION = 1e-3


def _check_cluster(em: ExplanationMatrix, cluster: int) -> None:
    if not (0 <= cluster < em.k):
        raise BadCluster(f"cluster {cluster} outside [0, {em.k})")


def rank_features(em: ExplanationMatrix, cluster: int) -> list[int]:
    """Feature indices sorted by descending mean |phi| toward the cluster's
    output; ties break toward the lower feature index."""
    _check_cluster(em, cluster)
    mean_abs = np.abs(em.phi[:, :, cluster]).mean(axis=0)
    return [int(j) for j in np.lexsort((np.arange(em.m), -mean_abs))]


def top_features(em: ExplanationMatrix, cluster: int) -> list[int]:
    return rank_features(em, cluster)[: min(TOP_FEATURES_CAP, em.m)]


def _bin_edges(lo: float, hi: float, nbins: int) -> np.ndarray:
    if hi <= lo:
        return np.array([lo, lo])  # zero-width range collapses to one bin
    return np.linspace(lo, hi, nbins + 1)


def interleaved_histograms(em: ExplanationMatrix, cluster: int, nbins: int = DEFAULT_HISTOGRAM_BINS) -> list[dict]:
    """Tooltip data: for each top feature, two histograms over a shared
    Shapley range - one for samples at or above the feature's mean value
    (even slots), one for samples below it (odd slots). Densities are
    normalized to the feature's largest bin count; a slot is flagged wide
    when only its side has mass in that bin.
    """
    _check_cluster(em, cluster)
    if nbins < 2:
        raise ValueError(f"nbins must be >= 2, got {nbins}")
    if em.n_test == 0:
        raise EmptyCluster("no explained rows")
    feats = top_features(em, cluster)
    phi_c = em.phi[:, :, cluster]
    shown = phi_c[:, feats]
    smin, smax = float(shown.min()), float(shown.max())
    edges = _bin_edges(smin, smax, nbins)
    out = []
    for j in feats:
        sigma = float(em.feature_values[:, j].mean())
        above = em.feature_values[:, j] >= sigma
        counts_above, _ = np.histogram(phi_c[above, j], bins=edges)
        counts_below, _ = np.histogram(phi_c[~above, j], bins=edges)
        denom = max(int(counts_above.max()), int(counts_below.max()), 1)
        slots = []
        for b in range(len(edges) - 1):
            ca, cb = int(counts_above[b]), int(counts_below[b])
            position = [float(edges[b]), float(edges[b + 1])]
            slots.append({
                "position": position,
                "side": "above_mean",
                "density": ca / denom,
                "count": ca,
                "wide": ca > 0 and cb == 0,
            })
            slots.append({
                "position": position,
                "side": "below_mean",
                "density": cb / denom,
                "count": cb,
                "wide": cb > 0 and ca == 0,
            })
        out.append({
            "feature_index": int(j),
            "feature": em.feature_names[j],
            "feature_mean": sigma,
            "shapley_min": smin,
            "shapley_max": smax,
            "bins": slots,
        })
    return out


def dot_plot(em: ExplanationMatrix, cluster: int, strip_bins: int = DEFAULT_HISTOGRAM_BINS) -> dict:
    """Per-sample (shapley, feature value, row id) triples for the top
    features, plus a density strip of counts over the shared Shapley axis."""
    _check_cluster(em, cluster)
    feats = top_features(em, cluster)
    phi_c = em.phi[:, :, cluster]
    shown = phi_c[:, feats]
    smin, smax = float(shown.min()), float(shown.max())
    edges = _bin_edges(smin, smax, strip_bins)
    features = []
    for j in feats:
        counts, _ = np.histogram(phi_c[:, j], bins=edges)
        features.append({
            "feature_index": int(j),
            "feature": em.feature_names[j],
            "points": [
                {
                    "row_id": int(em.test_indices[i]),
                    "shapley": float(phi_c[i, j]),
                    "feature_value": float(em.feature_values[i, j]),
                }
                for i in range(em.n_test)
            ],
            "density": {
                "bin_edges": [float(v) for v in edges],
                "counts": [int(v) for v in counts],
            },
        })
    return {
        "cluster_id": int(cluster),
        "shapley_min": smin,
        "shapley_max": smax,
        "features": features,
    }


def _gaussian_kde_curve(samples: np.ndarray, grid: np.ndarray, value_range: float) -> list[float]:
    """Gaussian KDE sampled on the grid; Scott's-rule bandwidth with a floor
    of 1e-3 of the Shapley range to survive near-constant samples."""
    n = samples.size
    sd = float(np.std(samples, ddof=1)) if n >= 2 else 0.0
    bandwidth = sd * n ** (-1.0 / 5.0) if sd > 0 else 0.0
    floor = KDE_BANDWIDTH_FLOOR_FRACTION * (value_range if value_range > 0 else 1.0)
    bandwidth = max(bandwidth, floor)
    z = (grid[:, None] - samples[None, :]) / bandwidth
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (n * bandwidth * math.sqrt(2.0 * math.pi))
    return [float(v) for v in dens]


def aggregated_kde(em: ExplanationMatrix, cluster: int, nbins: int = DEFAULT_KDE_BINS,
                   bandwidth_rule: str = "scott") -> dict:
    """Group features into equal-width bins of their total |phi| toward the
    cluster, and summarize each non-empty bin with one KDE curve per side of
    the feature-mean split. Curves sample 64 points over the cluster's
    Shapley range; an empty side is skipped (null curve)."""
    _check_cluster(em, cluster)
    if bandwidth_rule != "scott":
        raise ValueError(f"unsupported bandwidth rule {bandwidth_rule!r}")
    phi_c = em.phi[:, :, cluster]
    scores = np.abs(phi_c).sum(axis=0)
    lo, hi = float(scores.min()), float(scores.max())
    smin, smax = float(phi_c.min()), float(phi_c.max())
    grid = np.linspace(smin, smax, KDE_CURVE_POINTS) if smax > smin else np.full(KDE_CURVE_POINTS, smin)
    srange = smax - smin

    if hi > lo:
        width = (hi - lo) / nbins
        which = np.clip(((scores - lo) / width).astype(int), 0, nbins - 1)
        edges = np.linspace(lo, hi, nbins + 1)
        limits = [(float(edges[b]), float(edges[b + 1])) for b in range(nbins)]
    else:
        which = np.zeros(em.m, dtype=int)
        limits = [(lo, hi)]

    above_mask = em.feature_values >= em.feature_values.mean(axis=0)[None, :]
    bins = []
    for b in range(len(limits)):
        members = np.flatnonzero(which == b)
        if members.size == 0:
            continue  # only bins with elements are emitted
        pooled_above = phi_c[:, members][above_mask[:, members]]
        pooled_below = phi_c[:, members][~above_mask[:, members]]
        bins.append({
            "limits": [float(limits[b][0]), float(limits[b][1])],
            "member_feature_indices": [int(j) for j in members],
            "member_features": [em.feature_names[j] for j in members],
            "count": int(members.size),
            "curve_above": _gaussian_kde_curve(pooled_above, grid, srange) if pooled_above.size else None,
            "curve_below": _gaussian_kde_curve(pooled_below, grid, srange) if pooled_below.size else None,
        })
    return {
        "cluster_id": int(cluster),
        "score_min": lo,
        "score_max": hi,
        "shapley_min": smin,
        "shapley_max": smax,
        "curve_x": [float(v) for v in grid],
        "bins": bins,
    }


def importance_summary(em: ExplanationMatrix) -> dict:
    """Per cluster: the top features' mean |phi| (color intensity) and each
    feature's share of the cluster's selected total (bar height)."""
    clusters = []
    for c in range(em.k):
        feats = top_features(em, c)
        mean_abs = np.abs(em.phi[:, :, c]).mean(axis=0)
        total = float(mean_abs[feats].sum())
        features = []
        for j in feats:
            value = float(mean_abs[j])
            features.append({
                "feature_index": int(j),
                "feature": em.feature_names[j],
                "mean_abs_shapley": value,
                "share": value / total if total > 0 else 1.0 / len(feats),
            })
        clusters.append({"cluster_id": c, "features": features})
    return {"clusters": clusters}


def importance_heatmap(em: ExplanationMatrix) -> dict:
    """Sum of |phi| per (cluster, selected feature), with rows and columns
    independently average-linkage clustered and leaf-ordered to minimize
    adjacent distances."""
    if em.k < 2:
        raise TooFewClusters(f"heatmap needs K >= 2, got {em.k}")
    col_set = sorted({j for c in range(em.k) for j in top_features(em, c)})
    cells = np.abs(em.phi[:, col_set, :]).sum(axis=0).T  # (K, n_cols)
    row_order = _cluster_order(cells)
    col_order = _cluster_order(cells.T)
    return {
        "cluster_ids": list(range(em.k)),
        "feature_indices": [int(j) for j in col_set],
        "features": [em.feature_names[j] for j in col_set],
        "cells": [[float(v) for v in row] for row in cells],
        "row_order": row_order,
        "col_order": col_order,
    }


def _cluster_order(rows: np.ndarray) -> list[int]:
    n = rows.shape[0]
    if n == 1:
        return [0]
    Z = linkage_matrix(rows, "average")
    dist = pairwise_distances(rows)
    return [int(i) for i in optimal_leaf_order(Z, dist)]


def heatmap_natural_order(rows: np.ndarray) -> list[int]:
    """Leaf order of the same clustering without the reordering step
    (baseline for the ordering-quality comparison)."""
    n = rows.shape[0]
    if n == 1:
        return [0]
    Z = linkage_matrix(rows, "average")
    return [int(i) for i in natural_leaf_order(Z, n)]


def cluster_artifacts(em: ExplanationMatrix, cluster: int,
                      histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
                      kde_bins: int = DEFAULT_KDE_BINS) -> dict:
    """All per-cluster artifacts bundled: ranked features, tooltip
    histograms, dot plot, aggregated KDE."""
    _check_cluster(em, cluster)
    return {
        "cluster_id": int(cluster),
        "ranked_features": rank_features(em, cluster),
        "top_features": top_features(em, cluster),
        "histograms": interleaved_histograms(em, cluster, histogram_bins),
        "dot_plot": dot_plot(em, cluster),
        "aggregated_kde": aggregated_kde(em, cluster, kde_bins),
    }


__all__ = [
    "rank_features",
    "top_features",
    "interleaved_histograms",
    "dot_plot",
    "aggregated_kde",
    "importance_summary",
    "importance_heatmap",
    "cluster_artifacts",
    "heatmap_natural_order",
    "adjacent_distance_sum",
]
