"""HTTP facade: dataset/embedding upload, annotation (including lasso posts
from the UI), blocking explanation runs with polled progress, and retrieval
of persisted artifacts.

Status mapping: 400 malformed request, 404 unknown id, 409 explain before
annotate (or a run already active on the session), 422 domain errors with
the error class name in the body.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from starlette.concurrency import run_in_threadpool
from starlette.staticfiles import StaticFiles

from .annotation import ClusterAssignment, LassoPolygon, annotate
from .artifact import build_artifact, dumps_canonical, load_explanation, save_explanation
from .cluster_model import centroids
from .dataset import Dataset, load_dataset, standardize
from .embedding import Embedding, load_embedding, pca_embed
from .errors import ClusterShapError
from .shapley import ExplanationConfig, explain_all

ARTIFACT_DIR_ENV = "CLUSTERSHAP_ARTIFACTS"


def load_config_file(path: str | None) -> dict:
    """Key-value service config: bind, port, budget, background, seed, threads."""
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


@dataclass
class Session:
    dataset: Dataset
    created_at: float
    embedding: Embedding | None = None
    assignment: ClusterAssignment | None = None
    explanation_id: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Registry:
    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self.runs: dict[str, dict] = {}
        self.mutex = threading.Lock()
        self.run_counter = 0

    def new_run(self, dataset_id: str) -> str:
        with self.mutex:
            self.run_counter += 1
            run_id = f"run-{self.run_counter}"
            self.runs[run_id] = {
                "run_id": run_id,
                "dataset_id": dataset_id,
                "status": "running",
                "progress": 0.0,
            }
            return run_id


def _error(status: int, name: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": name, "detail": detail})


def create_app(artifact_dir: str | None = None, config: dict | None = None, static_dir: str | None = None) -> FastAPI:
    cfg = dict(config or {})
    directory = artifact_dir or os.environ.get(ARTIFACT_DIR_ENV) or cfg.get("artifact_dir") or "artifacts"
    os.makedirs(directory, exist_ok=True)
    defaults = ExplanationConfig(
        seed=int(cfg.get("seed", 42)),
        budget=cfg.get("budget"),
        background=int(cfg.get("background", 100)),
        threads=int(cfg.get("threads", 1)),
    )
    app = FastAPI(title="clustershap", docs_url=None, redoc_url=None)
    reg = _Registry()
    app.state.registry = reg
    app.state.artifact_dir = directory

    @app.exception_handler(ClusterShapError)
    async def _domain_error(_req, exc: ClusterShapError):
        return _error(422, type(exc).__name__, str(exc))

    @app.exception_handler(ValueError)
    async def _value_error(_req, exc: ValueError):
        return _error(400, "BadRequest", str(exc))

    def _session(dataset_id: str) -> Session | None:
        return reg.sessions.get(dataset_id)

    @app.post("/datasets")
    async def upload_dataset(request: Request, label_column: str | None = None, delimiter: str = ","):
        body = await request.body()
        if not body.strip():
            return _error(400, "BadRequest", "empty request body; expected CSV content")
        with tempfile.NamedTemporaryFile("wb", suffix=".csv", delete=False) as tmp:
            tmp.write(body)
            tmp_path = tmp.name
        try:
            d = load_dataset(tmp_path, label_column=label_column, delimiter=delimiter)
        finally:
            os.unlink(tmp_path)
        with reg.mutex:
            if d.id not in reg.sessions:
                reg.sessions[d.id] = Session(dataset=d, created_at=time.time())
        return {
            "dataset_id": d.id,
            "n": d.n,
            "m": d.m,
            "feature_names": list(d.feature_names),
            "has_labels": d.ground_truth is not None,
            "label_names": list(d.label_names) if d.label_names else None,
        }

    @app.post("/datasets/{dataset_id}/embedding")
    async def set_embedding(dataset_id: str, request: Request):
        sess = _session(dataset_id)
        if sess is None:
            return _error(404, "UnknownDataset", dataset_id)
        body = await request.body()
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            try:
                payload = json.loads(body)
            except json.JSONDecodeError as exc:
                return _error(400, "BadRequest", f"invalid JSON body: {exc}")
            if not isinstance(payload, dict) or payload.get("method") != "pca":
                return _error(400, "BadRequest", 'JSON body must be {"method": "pca"}')
            emb = pca_embed(sess.dataset)
        else:
            if not body.strip():
                return _error(400, "BadRequest", "expected a 2-column CSV body or a JSON method")
            with tempfile.NamedTemporaryFile("wb", suffix=".csv", delete=False) as tmp:
                tmp.write(body)
                tmp_path = tmp.name
            try:
                emb = load_embedding(tmp_path, sess.dataset)
            finally:
                os.unlink(tmp_path)
        sess.embedding = emb
        return {
            "dataset_id": dataset_id,
            "method_tag": emb.method_tag,
            "coords": [[float(x), float(y)] for x, y in emb.coords],
        }

    @app.post("/datasets/{dataset_id}/clusters")
    async def set_clusters(dataset_id: str, request: Request):
        sess = _session(dataset_id)
        if sess is None:
            return _error(404, "UnknownDataset", dataset_id)
        try:
            payload = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(400, "BadRequest", f"invalid JSON body: {exc}")
        if not isinstance(payload, dict) or "method" not in payload:
            return _error(400, "BadRequest", 'body must be a JSON object with a "method"')
        method = payload["method"]
        if method == "labeled":
            assignment = annotate(sess.dataset, sess.embedding, "labeled")
        elif method in ("kmeans", "agglomerative"):
            if sess.embedding is None:
                return _error(409, "NoEmbedding", "clustering requires an embedding; POST it first")
            k = payload.get("k")
            if not isinstance(k, int):
                return _error(400, "BadRequest", '"k" must be an integer')
            assignment = annotate(
                sess.dataset,
                sess.embedding,
                "clustering",
                algorithm=method,
                k=k,
                seed=int(payload.get("seed", 0)),
                linkage=payload.get("linkage", "average"),
            )
        elif method == "manual":
            if sess.embedding is None:
                return _error(409, "NoEmbedding", "lasso annotation requires an embedding; POST it first")
            raw_polys = payload.get("polygons")
            polygons = _parse_polygons(raw_polys)
            assignment = annotate(sess.dataset, sess.embedding, "manual", polygons=polygons)
        else:
            return _error(400, "BadRequest", f"unknown method {method!r}")
        sess.assignment = assignment
        return {
            "dataset_id": dataset_id,
            "method": assignment.method,
            "k": assignment.k,
            "labels": [int(v) for v in assignment.labels],
        }

    @app.post("/datasets/{dataset_id}/explain")
    async def run_explain(dataset_id: str, request: Request):
        sess = _session(dataset_id)
        if sess is None:
            return _error(404, "UnknownDataset", dataset_id)
        if sess.assignment is None:
            return _error(409, "NotAnnotated", "annotate the dataset before explaining")
        body = await request.body()
        payload = {}
        if body.strip():
            try:
                payload = json.loads(body)
            except json.JSONDecodeError as exc:
                return _error(400, "BadRequest", f"invalid JSON body: {exc}")
            if not isinstance(payload, dict):
                return _error(400, "BadRequest", "config body must be a JSON object")
        try:
            run_cfg = ExplanationConfig(
                fraction=float(payload.get("fraction", 0.2)),
                seed=int(payload.get("seed", defaults.seed)),
                budget=payload.get("budget", defaults.budget),
                background=int(payload.get("background", defaults.background)),
                threads=int(payload.get("threads", defaults.threads)),
            )
        except (TypeError, ValueError) as exc:
            return _error(400, "BadRequest", f"bad config value: {exc}")
        policy = payload.get("standardize", "none")

        if not sess.lock.acquire(blocking=False):
            return _error(409, "RunInProgress", "an explanation run is already active for this session")
        run_id = reg.new_run(dataset_id)
        try:
            def job() -> tuple[str, dict]:
                run = reg.runs[run_id]

                def on_progress(finished: int, total: int):
                    run["progress"] = finished / total

                data = standardize(sess.dataset, policy)
                cs = centroids(data, sess.assignment)
                em = explain_all(data, sess.assignment, cs, run_cfg, on_progress=on_progress)
                embedding = sess.embedding
                if embedding is None:  # labeled flow may skip the upload; views still need coords
                    embedding = pca_embed(sess.dataset)
                    sess.embedding = embedding
                doc = build_artifact(sess.dataset, embedding, sess.assignment, em, run_cfg, policy)
                tmp_path = os.path.join(directory, f"{run_id}.tmp")
                explanation_id = save_explanation(doc, tmp_path)
                os.replace(tmp_path, os.path.join(directory, f"{explanation_id}.json"))
                return explanation_id, doc

            explanation_id, _doc = await run_in_threadpool(job)
            sess.explanation_id = explanation_id
            reg.runs[run_id].update(status="done", progress=1.0, explanation_id=explanation_id)
            return {"explanation_id": explanation_id, "run_id": run_id}
        except ClusterShapError as exc:
            reg.runs[run_id].update(status="failed", error=type(exc).__name__)
            raise
        except ValueError as exc:
            reg.runs[run_id].update(status="failed", error="BadRequest")
            raise
        finally:
            sess.lock.release()

    @app.get("/runs")
    async def list_runs():
        return sorted(reg.runs.values(), key=lambda r: r["run_id"])

    @app.get("/runs/{run_id}")
    async def run_status(run_id: str):
        run = reg.runs.get(run_id)
        if run is None:
            return _error(404, "UnknownRun", run_id)
        return run

    @app.get("/explanations")
    async def list_explanations():
        out = []
        for name in sorted(os.listdir(directory)):
            if not name.endswith(".json"):
                continue
            path = os.path.join(directory, name)
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                out.append({
                    "explanation_id": name[: -len(".json")],
                    "dataset_id": doc["dataset"]["id"],
                    "n": doc["dataset"]["n"],
                    "m": doc["dataset"]["m"],
                    "k": doc["assignment"]["k"],
                    "method": doc["assignment"]["method"],
                })
            except (OSError, KeyError, json.JSONDecodeError):
                continue
        return out

    def _artifact_path(explanation_id: str) -> str | None:
        if "/" in explanation_id or "\\" in explanation_id or ".." in explanation_id:
            return None
        path = os.path.join(directory, f"{explanation_id}.json")
        return path if os.path.isfile(path) else None

    @app.get("/explanations/{explanation_id}")
    async def get_explanation(explanation_id: str):
        path = _artifact_path(explanation_id)
        if path is None:
            return _error(404, "UnknownExplanation", explanation_id)
        with open(path, "rb") as fh:
            raw = fh.read()  # exact persisted bytes
        return Response(content=raw, media_type="application/json")

    @app.get("/explanations/{explanation_id}/cluster/{cluster}")
    async def get_cluster(explanation_id: str, cluster: int):
        path = _artifact_path(explanation_id)
        if path is None:
            return _error(404, "UnknownExplanation", explanation_id)
        _em, doc = load_explanation(path)
        clusters = doc["summaries"]["clusters"]
        if not (0 <= cluster < len(clusters)):
            return _error(404, "BadCluster", f"cluster {cluster} outside [0, {len(clusters)})")
        return Response(content=dumps_canonical(clusters[cluster]), media_type="application/json")

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app


def _parse_polygons(raw) -> list[LassoPolygon]:
    if raw is None or not isinstance(raw, list):
        return []
    polygons = []
    for entry in raw:
        if not isinstance(entry, dict) or "cluster_id" not in entry or "vertices" not in entry:
            raise ValueError('each polygon needs {"cluster_id": int, "vertices": [[x, y], ...]}')
        polygons.append(LassoPolygon(entry["vertices"], int(entry["cluster_id"])))
    return polygons


def serve(bind: str = "127.0.0.1", port: int = 8000, artifact_dir: str | None = None,
          config: dict | None = None, static_dir: str | None = None) -> None:
    import uvicorn

    app = create_app(artifact_dir=artifact_dir, config=config, static_dir=static_dir)
    uvicorn.run(app, host=bind, port=port, log_level="warning")


if __name__ == "__main__":
    serve()
