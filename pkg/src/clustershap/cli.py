"""Headless pipeline driver: embed, annotate, explain, report, verify, serve.

All randomness funnels through explicit --seed flags (default 42) so two
runs with identical inputs produce byte-identical artifacts. Domain errors
exit nonzero with the error name on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .annotation import annotate
from .artifact import build_artifact, dumps_canonical, load_explanation, save_explanation
from .cluster_model import centroids
from .dataset import Dataset, load_dataset, standardize
from .embedding import Embedding, load_embedding, pca_embed
from .errors import ClusterShapError
from .seriation import adjacent_distance_sum, pairwise_distances
from .service import load_config_file, serve
from .shapley import ExplanationConfig, explain_all
from .summaries import heatmap_natural_order, rank_features


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset CSV (header row required)")
    p.add_argument("--label-column", default=None, help="column holding ground-truth labels")
    p.add_argument("--delimiter", default=",", help="CSV delimiter (default ,)")


def _add_annotate_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="labeled", choices=("labeled", "kmeans", "agglomerative"))
    p.add_argument("--k", type=int, default=None, help="cluster count for the clustering methods")
    p.add_argument("--linkage", default="average", choices=("average", "complete", "ward"))
    p.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clustershap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="compute or pass through a 2-D embedding")
    _add_dataset_args(p)
    p.add_argument("--method", default="pca", choices=("pca", "file"))
    p.add_argument("--coords", default=None, help="embedding CSV (required for --method file)")
    p.add_argument("--output", required=True, help="output embedding CSV (headerless x,y)")

    p = sub.add_parser("annotate", help="produce a cluster assignment")
    _add_dataset_args(p)
    _add_annotate_args(p)
    p.add_argument("--embedding", default=None, help="embedding CSV (required for clustering methods)")
    p.add_argument("--out", required=True, help="output assignment JSON")

    p = sub.add_parser("explain", help="run the full explanation pipeline")
    _add_dataset_args(p)
    _add_annotate_args(p)
    p.add_argument("--embedding", default=None, help="embedding CSV; default is the PCA baseline")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--budget", type=int, default=None, help="coalition budget (default min(2^m-2, 2m+2048))")
    p.add_argument("--background", type=int, default=100)
    p.add_argument("--standardize", default="none", choices=("none", "zscore", "minmax"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output artifact JSON")

    p = sub.add_parser("report", help="print ranked features and heatmap orders from an artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--cluster", type=int, required=True)
    p.add_argument("--out", default=None, help="per-cluster artifact JSON (default <artifact>.cluster<c>.json)")

    p = sub.add_parser("verify", help="re-check every artifact invariant; exit 0/1")
    p.add_argument("--artifact", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--artifacts", default=None, help="artifact directory (or env CLUSTERSHAP_ARTIFACTS)")
    p.add_argument("--config", default=None, help="JSON config file: budget, background, seed, threads")
    p.add_argument("--static", default=None, help="directory of built UI files to serve at /")
    return parser


def _load(args) -> Dataset:
    return load_dataset(args.input, label_column=args.label_column, delimiter=args.delimiter)


def _embedding_for(args, d: Dataset) -> Embedding:
    if getattr(args, "embedding", None):
        return load_embedding(args.embedding, d)
    return pca_embed(d)


def _annotate(args, d: Dataset, e: Embedding | None):
    if args.method == "labeled":
        return annotate(d, e, "labeled")
    return annotate(d, e, "clustering", algorithm=args.method, k=args.k,
                    linkage=args.linkage, seed=args.seed)


def cmd_embed(args) -> int:
    d = _load(args)
    if args.method == "file":
        if not args.coords:
            raise ValueError("--method file requires --coords")
        emb = load_embedding(args.coords, d)
    else:
        emb = pca_embed(d)
    with open(args.output, "w", encoding="utf-8") as fh:
        for x, y in emb.coords:
            fh.write(f"{float(x)!r},{float(y)!r}\n")
    print(f"wrote {emb.n} x 2 embedding ({emb.method_tag}) to {args.output}")
    return 0


def cmd_annotate(args) -> int:
    d = _load(args)
    e = _embedding_for(args, d) if (args.embedding or args.method != "labeled") else None
    a = _annotate(args, d, e)
    doc = {"method": a.method, "k": a.k, "labels": [int(v) for v in a.labels]}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    counts = {c: int(np.sum(a.labels == c)) for c in range(a.k)}
    print(f"annotated {a.n} rows into {a.k} clusters {counts} -> {args.out}")
    return 0


def cmd_explain(args) -> int:
    d = _load(args)
    e = _embedding_for(args, d)
    a = _annotate(args, d, e)
    config = ExplanationConfig(
        fraction=args.fraction,
        seed=args.seed,
        budget=args.budget,
        background=args.background,
        threads=args.threads,
    )
    data = standardize(d, args.standardize)
    cs = centroids(data, a)
    em = explain_all(data, a, cs, config)
    doc = build_artifact(d, e, a, em, config, args.standardize)
    explanation_id = save_explanation(doc, args.out)
    print(f"explained {em.n_test} rows x {em.m} features x {em.k} clusters -> {args.out} (id {explanation_id})")
    return 0


def cmd_report(args) -> int:
    em, doc = load_explanation(args.artifact)
    c = args.cluster
    clusters = doc["summaries"]["clusters"]
    if not (0 <= c < len(clusters)):
        raise ValueError(f"cluster {c} outside [0, {len(clusters)})")
    names = doc["dataset"]["feature_names"]
    order = rank_features(em, c)
    print(f"cluster {c} features by mean |shapley|:")
    mean_abs = np.abs(em.phi[:, :, c]).mean(axis=0)
    for rank, j in enumerate(order, start=1):
        print(f"  {rank}. {names[j]} ({mean_abs[j]:.6f})")
    hm = doc["summaries"]["importance_heatmap"]
    print(f"heatmap row order: {hm['row_order']}")
    print(f"heatmap col order: {hm['col_order']} over features {hm['features']}")
    out = args.out or f"{args.artifact}.cluster{c}.json"
    with open(out, "wb") as fh:
        fh.write(dumps_canonical(clusters[c]))
    print(f"wrote cluster artifact to {out}")
    return 0


def cmd_verify(args) -> int:
    em, doc = load_explanation(args.artifact)  # raises InvariantViolation on failure
    checks = [
        ("schema", doc["schema"]),
        ("local_accuracy", f"max residual {np.abs(em.phi.sum(axis=1) + em.base[None, :] - em.fx).max():.2e}"),
        ("probability_rows", f"max |sum - 1| {np.abs(em.fx.sum(axis=1) - 1.0).max():.2e}"),
        ("row_order", doc["summaries"]["importance_heatmap"]["row_order"]),
        ("col_order", doc["summaries"]["importance_heatmap"]["col_order"]),
    ]
    hm = doc["summaries"]["importance_heatmap"]
    cells = np.array(hm["cells"], dtype=float)
    ordered = adjacent_distance_sum(hm["row_order"], pairwise_distances(cells))
    natural = adjacent_distance_sum(heatmap_natural_order(cells), pairwise_distances(cells))
    checks.append(("row_order_cost", f"{ordered:.6f} <= natural {natural:.6f}"))
    if ordered > natural + 1e-9:
        print("FAIL row_order_cost", file=sys.stderr)
        return 1
    for name, value in checks:
        print(f"ok {name}: {value}")
    return 0


def cmd_serve(args) -> int:
    cfg = load_config_file(args.config)
    bind = args.bind if args.bind != "127.0.0.1" else cfg.get("bind", args.bind)
    port = args.port if args.port != 8000 else int(cfg.get("port", args.port))
    serve(bind=bind, port=port, artifact_dir=args.artifacts, config=cfg, static_dir=args.static)
    return 0


_COMMANDS = {
    "embed": cmd_embed,
    "annotate": cmd_annotate,
    "explain": cmd_explain,
    "report": cmd_report,
    "verify": cmd_verify,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ClusterShapError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"BadRequest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
