"""Explanation artifact document: one canonical JSON file carrying the
embedding, the cluster assignment, the full explanation matrix and every
visual summary. The same schema serves the CLI, the HTTP service and the UI.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .annotation import ClusterAssignment
from .dataset import Dataset
from .embedding import Embedding
from .errors import InvariantViolation, IoError, SchemaVersionMismatch
from .shapley import ExplanationConfig, ExplanationMatrix
from .summaries import cluster_artifacts, importance_heatmap, importance_summary

SCHEMA_VERSION = "cluster-shapley/1"


def build_artifact(
    d: Dataset,
    e: Embedding,
    a: ClusterAssignment,
    em: ExplanationMatrix,
    config: ExplanationConfig,
    standardize_policy: str = "none",
) -> dict:
    """Assemble the complete artifact document (plain JSON-ready types)."""
    em.validate()
    return {
        "schema": SCHEMA_VERSION,
        "dataset": {
            "id": d.id,
            "n": d.n,
            "m": d.m,
            "feature_names": list(d.feature_names),
            "standardize": standardize_policy,
        },
        "embedding": {
            "method_tag": e.method_tag,
            "coords": [[float(x), float(y)] for x, y in e.coords],
        },
        "assignment": {
            "method": a.method,
            "k": a.k,
            "labels": [int(v) for v in a.labels],
        },
        "config": {
            "fraction": config.fraction,
            "seed": config.seed,
            "budget": config.budget,
            "background": config.background,
            "threads": config.threads,
        },
        "explanation": {
            "base": [float(v) for v in em.base],
            "test_indices": [int(v) for v in em.test_indices],
            "feature_values": [[float(v) for v in row] for row in em.feature_values],
            "fx": [[float(v) for v in row] for row in em.fx],
            "phi": [[[float(v) for v in col] for col in row] for row in em.phi],
        },
        "summaries": {
            "clusters": [cluster_artifacts(em, c) for c in range(em.k)],
            "importance_summary": importance_summary(em),
            "importance_heatmap": importance_heatmap(em),
        },
    }


def dumps_canonical(doc: dict) -> bytes:
    """Deterministic serialization: sorted keys, no whitespace, NaN rejected."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def artifact_id(doc: dict) -> str:
    return hashlib.sha256(dumps_canonical(doc)).hexdigest()[:16]


def save_explanation(doc: dict, path: str) -> str:
    """Write the artifact canonically; returns its content id."""
    data = dumps_canonical(doc)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return hashlib.sha256(data).hexdigest()[:16]


def load_explanation(path: str) -> tuple[ExplanationMatrix, dict]:
    """Read and validate an artifact; returns the reconstructed explanation
    matrix and the full document. Rejects wrong schema versions and any
    document whose invariants fail."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise IoError(f"{path} is not valid JSON: {exc}") from exc
    return validate_artifact(doc), doc


def validate_artifact(doc: dict) -> ExplanationMatrix:
    """Check schema version and every verifiable invariant; returns the
    reconstructed ExplanationMatrix on success."""
    if not isinstance(doc, dict) or "schema" not in doc:
        raise SchemaVersionMismatch("document has no schema tag")
    if doc["schema"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"expected {SCHEMA_VERSION!r}, got {doc['schema']!r}")
    try:
        ds = doc["dataset"]
        ex = doc["explanation"]
        assign = doc["assignment"]
        emb = doc["embedding"]
        summaries = doc["summaries"]
        em = ExplanationMatrix(
            phi=np.array(ex["phi"], dtype=np.float64),
            base=np.array(ex["base"], dtype=np.float64),
            fx=np.array(ex["fx"], dtype=np.float64),
            test_indices=np.array(ex["test_indices"], dtype=np.int64),
            feature_values=np.array(ex["feature_values"], dtype=np.float64),
            feature_names=tuple(ds["feature_names"]),
            k=int(assign["k"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation("schema_shape", f"malformed artifact: {exc}") from exc

    em.validate()  # local accuracy and shape coherence

    if em.phi.shape[2] != em.k:
        raise InvariantViolation("shape", "phi output axis disagrees with assignment k")
    if len(em.feature_names) != em.m:
        raise InvariantViolation("shape", "feature_names length disagrees with phi")

    labels = np.array(assign["labels"], dtype=np.int64)
    n = int(ds["n"])
    if labels.shape != (n,):
        raise InvariantViolation("labels", f"expected {n} labels, got {labels.shape}")
    if labels.size and (labels.min() < -1 or labels.max() >= em.k):
        raise InvariantViolation("labels", "labels outside {-1} U [0, k)")
    if len(emb["coords"]) != n:
        raise InvariantViolation("embedding", f"expected {n} coordinate rows")
    if np.any(em.test_indices < 0) or np.any(em.test_indices >= n):
        raise InvariantViolation("test_indices", "row ids outside the dataset")

    row_sums = em.fx.sum(axis=1)
    if em.fx.size and (em.fx.min() < -1e-12 or np.abs(row_sums - 1.0).max() > 1e-9):
        raise InvariantViolation("probability", "fx rows are not probability vectors")

    hm = summaries["importance_heatmap"]
    if sorted(hm["row_order"]) != list(range(em.k)):
        raise InvariantViolation("row_order", "heatmap row order is not a permutation")
    if sorted(hm["col_order"]) != list(range(len(hm["feature_indices"]))):
        raise InvariantViolation("col_order", "heatmap column order is not a permutation")
    return em
