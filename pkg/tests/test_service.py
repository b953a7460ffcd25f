import json
import os

import numpy as np
import pytest
from fastapi.testclient import TestClient

import clustershap as cx
from clustershap.service import create_app
from conftest import IRIS_CSV


@pytest.fixture()
def client(tmp_path):
    app = create_app(artifact_dir=str(tmp_path / "artifacts"))
    with TestClient(app) as c:
        c.artifact_dir = str(tmp_path / "artifacts")
        yield c


def _upload_iris(client):
    csv_bytes = open(IRIS_CSV, "rb").read()
    r = client.post("/datasets?label_column=species", content=csv_bytes,
                    headers={"content-type": "text/csv"})
    assert r.status_code == 200
    return r.json()["dataset_id"]


def test_empty_explanations_list(client):
    r = client.get("/explanations")
    assert r.status_code == 200
    assert r.json() == []


def test_upload_validates(client):
    r = client.post("/datasets", content=b"a,b\n1.0,zzz\n", headers={"content-type": "text/csv"})
    assert r.status_code == 422
    assert r.json()["error"] == "NonNumericCell"
    r = client.post("/datasets", content=b"")
    assert r.status_code == 400


def test_unknown_dataset_404(client):
    assert client.post("/datasets/xxxx/embedding", json={"method": "pca"}).status_code == 404
    assert client.post("/datasets/xxxx/clusters", json={"method": "labeled"}).status_code == 404
    assert client.post("/datasets/xxxx/explain", json={}).status_code == 404
    assert client.get("/explanations/feedbeef").status_code == 404
    assert client.get("/runs/run-999").status_code == 404


def test_manual_zero_polygons_422(client):
    did = _upload_iris(client)
    client.post(f"/datasets/{did}/embedding", json={"method": "pca"})
    r = client.post(f"/datasets/{did}/clusters", json={"method": "manual", "polygons": []})
    assert r.status_code == 422
    assert r.json()["error"] == "MissingPolygons"


def test_explain_before_annotate_409(client):
    did = _upload_iris(client)
    r = client.post(f"/datasets/{did}/explain", json={})
    assert r.status_code == 409


def test_bad_k_maps_to_422(client):
    did = _upload_iris(client)
    client.post(f"/datasets/{did}/embedding", json={"method": "pca"})
    r = client.post(f"/datasets/{did}/clusters", json={"method": "kmeans", "k": 1})
    assert r.status_code == 422
    assert r.json()["error"] == "BadK"


def test_full_happy_path(client):
    did = _upload_iris(client)
    r = client.post(f"/datasets/{did}/embedding", json={"method": "pca"})
    assert r.status_code == 200
    assert len(r.json()["coords"]) == 150
    r = client.post(f"/datasets/{did}/clusters", json={"method": "labeled"})
    assert r.status_code == 200
    assert r.json()["k"] == 3
    r = client.post(f"/datasets/{did}/explain", json={"seed": 42})
    assert r.status_code == 200
    eid = r.json()["explanation_id"]
    rid = r.json()["run_id"]

    run = client.get(f"/runs/{rid}").json()
    assert run["status"] == "done" and run["progress"] == 1.0
    assert any(r["run_id"] == rid for r in client.get("/runs").json())

    r = client.get(f"/explanations/{eid}")
    assert r.status_code == 200
    doc = json.loads(r.content)
    em = cx.validate_artifact(doc)  # raises on any invariant failure
    assert em.phi.shape == (30, 4, 3)

    # byte-for-byte with the persisted file
    disk = open(os.path.join(client.artifact_dir, f"{eid}.json"), "rb").read()
    assert r.content == disk

    r = client.get(f"/explanations/{eid}/cluster/0")
    assert r.status_code == 200
    cluster = json.loads(r.content)
    assert {"histograms", "dot_plot", "aggregated_kde", "ranked_features"} <= set(cluster)

    listing = client.get("/explanations").json()
    assert [x["explanation_id"] for x in listing] == [eid]


def test_repost_identical_config_same_artifact(client):
    did = _upload_iris(client)
    client.post(f"/datasets/{did}/embedding", json={"method": "pca"})
    client.post(f"/datasets/{did}/clusters", json={"method": "labeled"})
    a = client.post(f"/datasets/{did}/explain", json={"seed": 7}).json()
    b = client.post(f"/datasets/{did}/explain", json={"seed": 7}).json()
    assert a["explanation_id"] == b["explanation_id"]
    raw = client.get(f"/explanations/{a['explanation_id']}").content
    assert raw == client.get(f"/explanations/{b['explanation_id']}").content


def test_lasso_round_trip_against_server(client):
    did = _upload_iris(client)
    coords = np.array(client.post(f"/datasets/{did}/embedding", json={"method": "pca"}).json()["coords"])
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    mid = (lo + hi) / 2
    polys = [{"cluster_id": 0, "vertices": [[lo[0] - 1, lo[1] - 1], [mid[0], lo[1] - 1],
                                            [mid[0], hi[1] + 1], [lo[0] - 1, hi[1] + 1]]}]
    r = client.post(f"/datasets/{did}/clusters", json={"method": "manual", "polygons": polys})
    assert r.status_code == 200
    labels = np.array(r.json()["labels"])
    inside = coords[:, 0] <= mid[0]
    assert np.array_equal(labels == 0, inside)
    assert set(labels[~inside]) == {-1}


def test_prior_artifact_served_after_restart(client, tmp_path):
    did = _upload_iris(client)
    client.post(f"/datasets/{did}/clusters", json={"method": "labeled"})
    eid = client.post(f"/datasets/{did}/explain", json={"seed": 3}).json()["explanation_id"]
    raw = client.get(f"/explanations/{eid}").content

    # a fresh app over the same artifact dir serves the stored explanation
    # without recomputation
    fresh = TestClient(create_app(artifact_dir=client.artifact_dir))
    assert fresh.get(f"/explanations/{eid}").content == raw
    assert fresh.get(f"/explanations/{eid}/cluster/1").status_code == 200
    assert [x["explanation_id"] for x in fresh.get("/explanations").json()] == [eid]


def test_embedding_csv_upload(client):
    did = _upload_iris(client)
    rng = np.random.default_rng(0)
    body = "\n".join(f"{x!r},{y!r}" for x, y in rng.normal(size=(150, 2)).tolist())
    r = client.post(f"/datasets/{did}/embedding", content=body.encode(),
                    headers={"content-type": "text/csv"})
    assert r.status_code == 200
    assert r.json()["method_tag"] == "external"
    bad = client.post(f"/datasets/{did}/embedding", content=b"1.0,2.0\n",
                      headers={"content-type": "text/csv"})
    assert bad.status_code == 422
    assert bad.json()["error"] == "RowCountMismatch"
