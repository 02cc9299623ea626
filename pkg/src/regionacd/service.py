"""HTTP job service: mesh upload, region management, decomposition jobs.

Disk-backed store (content-addressed blobs plus a JSON index), asynchronous
jobs with polling, and zip export of decomposition results.  No database;
the store survives restarts.
"""

from __future__ import annotations

import hashlib
import io
import json
import threading
import time
import uuid
import zipfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .bench import build_scene, run_bench
from .errors import OverlappingRegions, RegionAcdError
from .mesh import TriangleMesh, load_mesh, mesh_aabb, mesh_volume, save_mesh, validate
from .metrics import error_samples, evaluate_decomposition
from .pipeline import (
    Decomposition,
    PipelineParams,
    RegionBox,
    decomposition_manifest,
    interactive_decomposition,
    params_from_dict,
    validate_regions,
)
from .mesh import Aabb

MAX_UPLOAD_BYTES = 100 * 1024 * 1024
JOB_KINDS = ("decompose", "error_eval", "bench")


class SessionStore:
    """Disk-backed store for meshes, region sets, and job records.

    Blobs are content-addressed under ``data_dir/blobs``; mutable state
    (mesh index, regions, job states) lives in JSON files guarded by a
    single writer lock.
    """

    def __init__(self, data_dir):
        self.root = Path(data_dir)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        (self.root / "results").mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "index.json"
        self.lock = threading.Lock()
        if self.index_path.exists():
            self.index = json.loads(self.index_path.read_text())
        else:
            self.index = {"meshes": {}, "regions": {}, "jobs": {}}

    def _flush(self):
        tmp = self.index_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.index, indent=1))
        tmp.replace(self.index_path)

    def put_blob(self, data: bytes, suffix: str) -> str:
        digest = hashlib.sha256(data).hexdigest()[:24]
        path = self.root / "blobs" / f"{digest}{suffix}"
        if not path.exists():
            path.write_bytes(data)
        return path.name

    def blob_path(self, name: str) -> Path:
        return self.root / "blobs" / name

    def add_mesh(self, data: bytes, filename: str, meta: dict) -> str:
        suffix = Path(filename).suffix.lower() or ".obj"
        blob = self.put_blob(data, suffix)
        mesh_id = uuid.uuid4().hex[:12]
        with self.lock:
            self.index["meshes"][mesh_id] = {
                "blob": blob, "filename": filename, **meta,
            }
            self._flush()
        return mesh_id

    def get_mesh_record(self, mesh_id: str) -> dict:
        record = self.index["meshes"].get(mesh_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown mesh id {mesh_id!r}")
        return record

    def load_mesh(self, mesh_id: str) -> TriangleMesh:
        record = self.get_mesh_record(mesh_id)
        return load_mesh(self.blob_path(record["blob"]))

    def set_regions(self, mesh_id: str, regions: dict):
        self.get_mesh_record(mesh_id)
        with self.lock:
            self.index["regions"][mesh_id] = regions
            self._flush()

    def get_regions(self, mesh_id: str) -> dict | None:
        return self.index["regions"].get(mesh_id)

    def create_job(self, kind: str, mesh_id: str, params: dict) -> str:
        job_id = uuid.uuid4().hex[:12]
        with self.lock:
            self.index["jobs"][job_id] = {
                "id": job_id, "kind": kind, "mesh_id": mesh_id,
                "params": params, "state": "queued", "progress": 0.0,
                "error": None, "created": time.time(),
            }
            self._flush()
        return job_id

    def get_job(self, job_id: str) -> dict:
        job = self.index["jobs"].get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job id {job_id!r}")
        return job

    def update_job(self, job_id: str, **fields):
        with self.lock:
            self.index["jobs"][job_id].update(fields)
            self._flush()

    def result_dir(self, job_id: str) -> Path:
        path = self.root / "results" / job_id
        path.mkdir(parents=True, exist_ok=True)
        return path


def _region_boxes(payload: dict) -> list[RegionBox]:
    return params_from_dict(payload).regions


def _run_decompose_job(store: SessionStore, job_id: str):
    job = store.get_job(job_id)
    try:
        store.update_job(job_id, state="running", progress=0.1)
        mesh = store.load_mesh(job["mesh_id"])
        params = params_from_dict(job["params"])
        decomp = interactive_decomposition(mesh, params)
        store.update_job(job_id, progress=0.8)
        out = store.result_dir(job_id)
        part_files, exact_files = [], []
        for i, part in enumerate(decomp.convex_parts):
            name = f"part_{i:04d}.obj"
            save_mesh(part.to_mesh(), out / name)
            part_files.append(name)
        for i, exact in enumerate(decomp.exact_meshes):
            name = f"exact_{i:04d}.obj"
            save_mesh(exact.mesh, out / name)
            exact_files.append(name)
        manifest = decomposition_manifest(decomp, part_files, exact_files)
        manifest["regions"] = job["params"].get("regions", [])
        (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
        store.update_job(job_id, state="done", progress=1.0)
    except RegionAcdError as exc:
        store.update_job(job_id, state="failed", error=str(exc))
    except Exception as exc:  # pragma: no cover - defensive
        store.update_job(job_id, state="failed", error=f"internal error: {exc}")


def _load_job_decomposition(store: SessionStore, job_id: str) -> Decomposition:
    from .convex import convex_hull
    from .pipeline import DecompositionStats, ExactRegionMesh

    out = store.result_dir(job_id)
    manifest = json.loads((out / "manifest.json").read_text())
    parts = []
    for entry in manifest["parts"]:
        mesh = load_mesh(out / entry["file"])
        part = convex_hull(mesh.vertices, source_mesh=mesh)
        part.provenance = entry["provenance"]
        part.source_volume = entry.get("volume")
        parts.append(part)
    exact = []
    for entry in manifest["exact_meshes"]:
        exact.append(ExactRegionMesh(entry["region_id"], load_mesh(out / entry["file"])))
    return Decomposition(parts, exact, DecompositionStats())


def _run_error_job(store: SessionStore, job_id: str):
    job = store.get_job(job_id)
    try:
        store.update_job(job_id, state="running", progress=0.1)
        params = job["params"]
        mesh = store.load_mesh(job["mesh_id"])
        decomp = _load_job_decomposition(store, params["decompose_job_id"])
        regions = _region_boxes(params)
        report = evaluate_decomposition(
            mesh, decomp, list(regions),
            n=int(params.get("n", 20000)), seed=int(params.get("seed", 0)),
        )
        out = store.result_dir(job_id)
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1))
        store.update_job(job_id, state="done", progress=1.0)
    except RegionAcdError as exc:
        store.update_job(job_id, state="failed", error=str(exc))
    except Exception as exc:  # pragma: no cover - defensive
        store.update_job(job_id, state="failed", error=f"internal error: {exc}")


def _run_bench_job(store: SessionStore, job_id: str):
    job = store.get_job(job_id)
    try:
        store.update_job(job_id, state="running", progress=0.1)
        params = job["params"]
        decomp = _load_job_decomposition(store, params["decompose_job_id"])
        seed = int(params.get("seed", 0))
        scene = build_scene(decomp, seed=seed)
        report = run_bench(scene, steps=int(params.get("steps", 100)), seed=seed)
        out = store.result_dir(job_id)
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1))
        store.update_job(job_id, state="done", progress=1.0)
    except RegionAcdError as exc:
        store.update_job(job_id, state="failed", error=str(exc))
    except Exception as exc:  # pragma: no cover - defensive
        store.update_job(job_id, state="failed", error=f"internal error: {exc}")


_JOB_RUNNERS = {
    "decompose": _run_decompose_job,
    "error_eval": _run_error_job,
    "bench": _run_bench_job,
}


def create_app(data_dir="./regionacd-data", max_jobs: int = 2) -> FastAPI:
    """Build the FastAPI application with its own store and worker pool."""
    app = FastAPI(title="region-aware convex decomposition service",
                  version=__version__)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(data_dir)
    pool = ThreadPoolExecutor(max_workers=max_jobs)
    app.state.store = store
    app.state.pool = pool

    @app.post("/meshes")
    async def upload_mesh(request: Request):
        data = await request.body()
        if len(data) > MAX_UPLOAD_BYTES:
            raise HTTPException(status_code=413, detail="mesh upload exceeds 100 MB")
        if not data:
            raise HTTPException(status_code=422, detail="empty upload")
        filename = request.headers.get("x-filename", "upload.obj")
        suffix = Path(filename).suffix.lower() or ".obj"
        tmp = store.root / "blobs" / f"incoming-{uuid.uuid4().hex}{suffix}"
        tmp.write_bytes(data)
        try:
            mesh = load_mesh(tmp, force=True)
            report = validate(mesh)
        except RegionAcdError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        finally:
            tmp.unlink(missing_ok=True)
        box = mesh_aabb(mesh)
        meta = {
            "n_vertices": len(mesh.vertices),
            "n_faces": len(mesh.faces),
            "watertight": report.watertight,
            "aabb_min": [float(x) for x in box.min],
            "aabb_max": [float(x) for x in box.max],
            "volume": mesh_volume(mesh) if report.watertight else None,
        }
        mesh_id = store.add_mesh(data, filename, meta)
        return {"mesh_id": mesh_id, "validation": report.to_dict(), **meta}

    @app.get("/meshes/{mesh_id}")
    def get_mesh(mesh_id: str, download: bool = False):
        record = store.get_mesh_record(mesh_id)
        if download:
            data = store.blob_path(record["blob"]).read_bytes()
            return Response(content=data, media_type="application/octet-stream")
        return {"mesh_id": mesh_id, **{k: v for k, v in record.items() if k != "blob"},
                "regions": store.get_regions(mesh_id)}

    @app.put("/meshes/{mesh_id}/regions")
    def put_regions(mesh_id: str, payload: dict):
        mesh = store.load_mesh(mesh_id)
        try:
            regions = _region_boxes(payload)
            report = validate_regions(mesh, list(regions))
        except (OverlappingRegions, KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")
        store.set_regions(mesh_id, payload)
        return {"ok": True, "warnings": report.warnings}

    @app.post("/jobs")
    def post_job(payload: dict):
        kind = payload.get("kind")
        if kind not in JOB_KINDS:
            raise HTTPException(status_code=422,
                                detail=f"kind must be one of {JOB_KINDS}")
        mesh_id = payload.get("mesh_id", "")
        params = payload.get("params", {})
        if kind == "decompose":
            mesh = store.load_mesh(mesh_id)
            try:
                pipeline_params = params_from_dict(params)
                validate_regions(mesh, list(pipeline_params.regions))
            except (OverlappingRegions, KeyError, ValueError, TypeError) as exc:
                raise HTTPException(status_code=422,
                                    detail=f"{type(exc).__name__}: {exc}")
        else:
            ref = params.get("decompose_job_id")
            if not ref:
                raise HTTPException(status_code=422,
                                    detail="params.decompose_job_id is required")
            dep = store.get_job(ref)
            if dep["state"] != "done":
                raise HTTPException(status_code=409,
                                    detail=f"job {ref!r} is not done")
            if kind == "error_eval":
                store.get_mesh_record(mesh_id)
        job_id = store.create_job(kind, mesh_id, params)
        pool.submit(_JOB_RUNNERS[kind], store, job_id)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get_job(job_id)
        return {k: job[k] for k in ("id", "kind", "state", "progress", "error")}

    @app.get("/jobs/{job_id}/result")
    def get_job_result(job_id: str):
        job = store.get_job(job_id)
        if job["state"] != "done":
            raise HTTPException(status_code=409,
                                detail=f"job is {job['state']}, not done")
        out = store.result_dir(job_id)
        if job["kind"] == "decompose":
            return json.loads((out / "manifest.json").read_text())
        return json.loads((out / "report.json").read_text())

    @app.get("/jobs/{job_id}/files/{name}")
    def get_job_file(job_id: str, name: str):
        job = store.get_job(job_id)
        if job["state"] != "done":
            raise HTTPException(status_code=409, detail="job not done")
        path = store.result_dir(job_id) / Path(name).name
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"no file {name!r}")
        return Response(content=path.read_bytes(),
                        media_type="application/octet-stream")

    @app.post("/evaluate/error")
    def evaluate_error(payload: dict):
        mesh_id = payload.get("mesh_id", "")
        mesh = store.load_mesh(mesh_id)
        ref = payload.get("decompose_job_id")
        if not ref:
            raise HTTPException(status_code=422,
                                detail="decompose_job_id is required")
        job = store.get_job(ref)
        if job["state"] != "done":
            raise HTTPException(status_code=409, detail=f"job {ref!r} is not done")
        decomp = _load_job_decomposition(store, ref)
        boxes = []
        for entry in payload.get("filter_boxes", []):
            boxes.append(Aabb(np.asarray(entry["min"], float),
                              np.asarray(entry["max"], float)))
        try:
            samples = error_samples(
                mesh,
                decomp.convex_parts + [
                    _hull_of(e.mesh) for e in decomp.exact_meshes
                ],
                n=int(payload.get("n", 20000)),
                alpha=float(payload.get("alpha", 0.0)),
                beta=payload.get("beta"),
                filter_boxes=boxes,
                on_approx=bool(payload.get("on_approx", True)),
                seed=int(payload.get("seed", 0)),
            )
        except RegionAcdError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return samples.to_dict()

    @app.get("/export/{job_id}")
    def export_job(job_id: str):
        job = store.get_job(job_id)
        if job["state"] != "done":
            raise HTTPException(status_code=409, detail="job not done")
        out = store.result_dir(job_id)
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
            for path in sorted(out.iterdir()):
                zf.write(path, arcname=path.name)
        return Response(content=buffer.getvalue(), media_type="application/zip",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{job_id}.zip"'})

    return app


def _hull_of(mesh: TriangleMesh):
    from .convex import convex_hull
    return convex_hull(mesh.vertices, source_mesh=mesh)


def serve(port: int = 8732, data_dir="./regionacd-data", max_jobs: int = 2,
          host: str = "127.0.0.1"):
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(data_dir=data_dir, max_jobs=max_jobs),
                host=host, port=port)
