"""HTTP job service, exercised in-process via the FastAPI test client."""

import io
import json
import time
import zipfile

import numpy as np
import pytest
from fastapi.testclient import TestClient

from regionacd import fixtures as F
from regionacd import save_mesh
from regionacd.service import create_app


def obj_bytes(mesh):
    lines = [f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}" for v in mesh.vertices]
    lines += [f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}" for f in mesh.faces]
    return ("\n".join(lines) + "\n").encode()


L_REGIONS = {
    "regions": [
        {"id": "notch", "min": [0, 1, 0], "max": [1, 2, 1], "tolerance": 0.0},
    ],
    "remainder_tolerance": 0.05,
    "seed": 0,
}


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path / "data", max_jobs=2)
    with TestClient(app) as c:
        yield c


def upload(client, mesh, name="mesh.obj"):
    resp = client.post("/meshes", content=obj_bytes(mesh),
                       headers={"x-filename": name})
    assert resp.status_code == 200, resp.text
    return resp.json()


def wait_job(client, job_id, timeout=120.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.1)
    raise TimeoutError(f"job {job_id} did not finish")


def run_decompose(client, mesh_id, params=L_REGIONS):
    resp = client.post("/jobs", json={
        "kind": "decompose", "mesh_id": mesh_id, "params": params})
    assert resp.status_code == 200, resp.text
    job_id = resp.json()["job_id"]
    job = wait_job(client, job_id)
    assert job["state"] == "done", job
    return job_id


# ---------------------------------------------------------------------------
# meshes

def test_upload_and_get_mesh(client):
    meta = upload(client, F.l_prism(), "l.obj")
    assert meta["watertight"]
    assert meta["volume"] == pytest.approx(3.0)
    record = client.get(f"/meshes/{meta['mesh_id']}").json()
    assert record["filename"] == "l.obj"
    assert record["n_faces"] == len(F.l_prism().faces)
    raw = client.get(f"/meshes/{meta['mesh_id']}", params={"download": True})
    assert raw.content == obj_bytes(F.l_prism())


def test_upload_rejects_empty_and_garbage(client):
    assert client.post("/meshes", content=b"").status_code == 422
    resp = client.post("/meshes", content=b"v 0 0\nf 1 2 3\n",
                       headers={"x-filename": "bad.obj"})
    assert resp.status_code == 422


def test_unknown_ids_404(client):
    assert client.get("/meshes/nope").status_code == 404
    assert client.get("/jobs/nope").status_code == 404


# ---------------------------------------------------------------------------
# regions

def test_put_regions_accepts_valid(client):
    meta = upload(client, F.l_prism())
    resp = client.put(f"/meshes/{meta['mesh_id']}/regions", json=L_REGIONS)
    assert resp.status_code == 200
    assert resp.json()["ok"]
    stored = client.get(f"/meshes/{meta['mesh_id']}").json()["regions"]
    assert stored == L_REGIONS


def test_put_regions_rejects_overlap(client):
    meta = upload(client, F.l_prism())
    overlapping = {"regions": [
        {"id": "a", "min": [0, 0, 0], "max": [1.5, 1, 1], "tolerance": 0.1},
        {"id": "b", "min": [1, 0, 0], "max": [2, 1, 1], "tolerance": 0.1},
    ]}
    resp = client.put(f"/meshes/{meta['mesh_id']}/regions", json=overlapping)
    assert resp.status_code == 422
    assert "OverlappingRegions" in resp.json()["detail"]


# ---------------------------------------------------------------------------
# jobs

def test_decompose_job_round_trip(client):
    meta = upload(client, F.l_prism())
    job_id = run_decompose(client, meta["mesh_id"])
    manifest = client.get(f"/jobs/{job_id}/result").json()
    assert len(manifest["exact_meshes"]) == 1   # zero-tolerance notch
    assert len(manifest["parts"]) >= 1
    # the part files are retrievable
    name = manifest["parts"][0]["file"]
    resp = client.get(f"/jobs/{job_id}/files/{name}")
    assert resp.status_code == 200
    assert resp.content.startswith(b"v ")


def test_job_validation_errors(client):
    meta = upload(client, F.l_prism())
    assert client.post("/jobs", json={"kind": "bogus"}).status_code == 422
    overlapping = {"regions": [
        {"id": "a", "min": [0, 0, 0], "max": [1.5, 1, 1], "tolerance": 0.1},
        {"id": "b", "min": [1, 0, 0], "max": [2, 1, 1], "tolerance": 0.1},
    ]}
    resp = client.post("/jobs", json={
        "kind": "decompose", "mesh_id": meta["mesh_id"], "params": overlapping})
    assert resp.status_code == 422
    # dependent jobs need a finished decompose job
    resp = client.post("/jobs", json={
        "kind": "bench", "mesh_id": meta["mesh_id"], "params": {}})
    assert resp.status_code == 422
    resp = client.get(f"/jobs/whatever/result")
    assert resp.status_code == 404


def test_result_conflict_before_done(client):
    """A queued/running job answers 409 on its result endpoint."""
    meta = upload(client, F.motor_like(), "motor.obj")
    resp = client.post("/jobs", json={
        "kind": "decompose", "mesh_id": meta["mesh_id"],
        "params": {"remainder_tolerance": 0.05}})
    job_id = resp.json()["job_id"]
    conflict_seen = False
    job = client.get(f"/jobs/{job_id}").json()
    if job["state"] != "done":
        conflict_seen = client.get(f"/jobs/{job_id}/result").status_code == 409
    wait_job(client, job_id)
    assert conflict_seen or client.get(f"/jobs/{job_id}/result").status_code == 200


def test_error_eval_job(client):
    meta = upload(client, F.l_prism())
    dec_id = run_decompose(client, meta["mesh_id"])
    resp = client.post("/jobs", json={
        "kind": "error_eval", "mesh_id": meta["mesh_id"],
        "params": {"decompose_job_id": dec_id, "n": 4000, **L_REGIONS}})
    assert resp.status_code == 200
    job = wait_job(client, resp.json()["job_id"])
    assert job["state"] == "done"
    report = client.get(f"/jobs/{job['id']}/result").json()
    assert report["regions"][0]["region_id"] == "notch"
    assert report["overall"] <= 1e-6   # exact decomposition of the prism


def test_bench_job(client):
    meta = upload(client, F.l_prism())
    dec_id = run_decompose(client, meta["mesh_id"])
    resp = client.post("/jobs", json={
        "kind": "bench", "mesh_id": meta["mesh_id"],
        "params": {"decompose_job_id": dec_id, "steps": 3}})
    job = wait_job(client, resp.json()["job_id"])
    assert job["state"] == "done"
    report = client.get(f"/jobs/{job['id']}/result").json()
    assert report["total_narrowphase_queries"] > 0


def test_evaluate_error_endpoint(client):
    meta = upload(client, F.l_prism())
    dec_id = run_decompose(client, meta["mesh_id"])
    resp = client.post("/evaluate/error", json={
        "mesh_id": meta["mesh_id"], "decompose_job_id": dec_id, "n": 2000})
    assert resp.status_code == 200
    payload = resp.json()
    assert len(payload["points"]) == len(payload["colors"])
    # sample-to-sample distances are bounded by the sample spacing
    spacing = np.sqrt(F.l_prism().area() / 2000)
    assert max(payload["distances"]) <= 3 * spacing


def test_export_zip(client):
    meta = upload(client, F.l_prism())
    dec_id = run_decompose(client, meta["mesh_id"])
    resp = client.get(f"/export/{dec_id}")
    assert resp.status_code == 200
    archive = zipfile.ZipFile(io.BytesIO(resp.content))
    names = archive.namelist()
    assert "manifest.json" in names
    assert any(n.startswith("part_") for n in names)


def test_store_survives_restart(client, tmp_path):
    meta = upload(client, F.l_prism())
    app2 = create_app(data_dir=tmp_path / "data", max_jobs=1)
    with TestClient(app2) as c2:
        record = c2.get(f"/meshes/{meta['mesh_id']}")
        assert record.status_code == 200
        assert record.json()["volume"] == pytest.approx(3.0)
