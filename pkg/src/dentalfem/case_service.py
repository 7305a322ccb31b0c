"""HTTP JSON API orchestrating the pipeline for interactive use.

One directory per case holds the uploaded NIfTI, a JSON case document,
label volumes as NIfTI, meshes and solutions as .npz containers, and the
exported VTK, so a service restart reconstructs everything from disk.
Long-running stages execute as jobs in a bounded thread pool (FIFO per
case, at most one running job per case); job functions snapshot their
inputs under the case lock, compute without it, and commit results under
it again.

Stage ordering volume -> segment -> mesh -> solve is enforced; mutating an
earlier stage's inputs marks every later stage stale, and stale artifacts
are never served as current.
"""

from __future__ import annotations

import base64
import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse

from . import elasticity as el
from . import segmentation as seg
from . import workflow as wf
from .errors import (
    CaseBusyError,
    CaseNotFoundError,
    ConfigurationError,
    DentalFemError,
    MarkerError,
    SequencingError,
    VolumeBoundsError,
)
from .volume import LabelVolume, extract_slice, read_nifti, write_nifti

STAGES = ("segment", "mesh", "solve")

_STATUS_BY_ERROR = (
    (CaseNotFoundError, 404),
    (CaseBusyError, 409),
    (SequencingError, 409),
    (VolumeBoundsError, 422),
    (MarkerError, 422),
    (ConfigurationError, 422),
)


def _with_stage(err: DentalFemError, stage: str) -> DentalFemError:
    err.stage = stage  # surfaces in the error JSON
    return err


def _parse_payload(what: str, fn):
    """Turn malformed request bodies into clean 422s instead of 500s."""
    try:
        return fn()
    except DentalFemError:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigurationError(f"malformed {what} payload: {err}") from None


def _new_case_doc(case_id: str, metadata: dict) -> dict:
    return {
        "case_id": case_id,
        "metadata": {"name": str(metadata.get("name", "")),
                     "notes": str(metadata.get("notes", ""))},
        "revision": 0,
        "volume": None,
        "segmentation": {"params": None, "markers": None, "cuts": None},
        "prostheses": [],
        "materials": None,
        "stages": {"segment": {}, "mesh": {}, "solve": {}},
    }


class CaseStore:
    """Disk layout: <data_dir>/<case_id>/case.json plus stage artifacts."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, case_id: str) -> threading.RLock:
        with self._locks_guard:
            return self._locks.setdefault(case_id, threading.RLock())

    def case_dir(self, case_id: str) -> Path:
        return self.data_dir / case_id

    def path(self, case_id: str, name: str) -> Path:
        return self.case_dir(case_id) / name

    def create(self, metadata: dict) -> dict:
        case_id = uuid.uuid4().hex[:12]
        doc = _new_case_doc(case_id, metadata or {})
        self.case_dir(case_id).mkdir(parents=True)
        self._write(case_id, doc)
        return doc

    def list_ids(self) -> list[str]:
        return sorted(p.name for p in self.data_dir.iterdir()
                      if (p / "case.json").exists())

    def load(self, case_id: str) -> dict:
        path = self.path(case_id, "case.json")
        if not path.exists():
            raise CaseNotFoundError(f"no case {case_id}")
        return json.loads(path.read_text())

    def _write(self, case_id: str, doc: dict) -> None:
        tmp = self.path(case_id, "case.json.tmp")
        tmp.write_text(json.dumps(doc, indent=1))
        os.replace(tmp, self.path(case_id, "case.json"))

    def mutate(self, case_id: str, fn) -> dict:
        """Load-modify-store under the case lock; fn(doc) edits in place."""
        with self.lock(case_id):
            doc = self.load(case_id)
            fn(doc)
            doc["revision"] += 1
            self._write(case_id, doc)
            return doc

    def commit(self, case_id: str, fn) -> dict:
        """Like mutate but without bumping the revision (job results)."""
        with self.lock(case_id):
            doc = self.load(case_id)
            fn(doc)
            self._write(case_id, doc)
            return doc


def _invalidate(doc: dict, from_stage: str) -> None:
    start = STAGES.index(from_stage)
    for stage in STAGES[start:]:
        table = doc["stages"][stage]
        for key, entry in table.items():
            if entry.get("state") == "done":
                entry["state"] = "stale"


class JobManager:
    def __init__(self, workers: int | None):
        self.executor = ThreadPoolExecutor(max_workers=workers or os.cpu_count() or 2)
        self.jobs: dict[str, dict] = {}
        self.active: dict[str, str] = {}  # case_id -> job_id
        self.guard = threading.Lock()

    def submit(self, case_id: str, stage: str, variant, fn) -> dict:
        with self.guard:
            if case_id in self.active:
                raise CaseBusyError(f"case {case_id} already has job {self.active[case_id]} running")
            job_id = uuid.uuid4().hex[:12]
            job = {
                "job_id": job_id, "case_id": case_id, "stage": stage,
                "variant": variant, "state": "queued", "progress": 0.0,
                "error": None,
                "timings": {"queued_at": time.time(), "started_at": None,
                            "finished_at": None},
            }
            self.jobs[job_id] = job
            self.active[case_id] = job_id

        def run():
            job["state"] = "running"
            job["timings"]["started_at"] = time.time()
            try:
                fn(job)
            except Exception as err:  # job errors land in the status record
                job["state"] = "failed"
                job["error"] = str(err)
            else:
                job["state"] = "done"
                job["progress"] = 1.0
            finally:
                job["timings"]["finished_at"] = time.time()
                with self.guard:
                    self.active.pop(case_id, None)

        self.executor.submit(run)
        return dict(job)

    def poll(self, job_id: str) -> dict:
        if job_id not in self.jobs:
            raise CaseNotFoundError(f"no job {job_id}")
        job = self.jobs[job_id]
        return {k: (dict(v) if isinstance(v, dict) else v) for k, v in job.items()}


# --------------------------------------------------------------------------
# stage runners
# --------------------------------------------------------------------------

def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SequencingError(message)


def _stage_entry(doc: dict, stage: str, key: str) -> dict:
    return doc["stages"][stage].get(key, {})


def _run_segment(store: CaseStore, case_id: str, job: dict) -> None:
    with store.lock(case_id):
        doc = store.load(case_id)
        _require(doc["volume"] is not None, "upload a volume before segmenting")
        seg_doc = doc["segmentation"]
        _require(seg_doc["params"] is not None, "set segmentation params first")
        _require(seg_doc["markers"] is not None, "set markers first")
        volume = read_nifti(store.path(case_id, "volume.nii").read_bytes())
        params = seg.SegmentationParams(**seg_doc["params"])
        markers = wf.markers_from_doc(seg_doc["markers"])
        cuts = assignment = None
        if seg_doc["cuts"]:
            cuts, assignment = wf.cuts_from_doc(seg_doc["cuts"])
        rev = doc["revision"]
    job["progress"] = 0.1
    labels = wf.segment_stage(volume, params, markers, cuts, assignment)
    store.path(case_id, "labels.nii").write_bytes(write_nifti(labels))

    def commit(doc):
        doc["stages"]["segment"]["0"] = {"state": "done", "rev": rev}
    store.commit(case_id, commit)


def _run_mesh(store: CaseStore, case_id: str, variant: int, job: dict) -> None:
    with store.lock(case_id):
        doc = store.load(case_id)
        _require(_stage_entry(doc, "segment", "0").get("state") == "done",
                 "run segmentation before meshing")
        _require(variant < len(doc["prostheses"]),
                 f"no prosthesis variant {variant} configured")
        spec = wf.prosthesis_from_doc(doc["prostheses"][variant])
        labels = read_nifti(store.path(case_id, "labels.nii").read_bytes(), as_labels=True)
        rev = doc["revision"]
    job["progress"] = 0.1
    mesh, fragment, record, warnings = wf.mesh_stage(labels, spec)
    wf.save_mesh(store.path(case_id, f"mesh_{variant}.npz"), mesh)
    store.path(case_id, f"fragment_{variant}.nii").write_bytes(write_nifti(fragment))
    store.path(case_id, f"mesh_{variant}.vtk").write_bytes(el.export_vtk(mesh))

    def commit(doc):
        doc["stages"]["mesh"][str(variant)] = {
            "state": "done", "rev": rev, "warnings": warnings,
            "tets": mesh.num_tets, "nodes": mesh.num_nodes,
        }
    store.commit(case_id, commit)


def _run_solve(store: CaseStore, case_id: str, variant: int, job: dict) -> None:
    with store.lock(case_id):
        doc = store.load(case_id)
        _require(_stage_entry(doc, "mesh", str(variant)).get("state") == "done",
                 "run meshing before solving")
        if doc["materials"] is None:
            raise ConfigurationError("no materials configured for this case")
        table, loads = el.parse_materials_config(doc["materials"])
        spec = wf.prosthesis_from_doc(doc["prostheses"][variant])
        mesh = wf.load_mesh(store.path(case_id, f"mesh_{variant}.npz"))
        fragment = read_nifti(store.path(case_id, f"fragment_{variant}.nii").read_bytes(),
                              as_labels=True)
        rev = doc["revision"]
    job["progress"] = 0.1
    solution, report = wf.solve_stage(mesh, table, loads, mobility=spec.mobility_degree)
    job["progress"] = 0.8
    fields = wf.voxel_fields(fragment, solution)
    wf.save_solution(store.path(case_id, f"solution_{variant}.npz"), solution, report, fields)
    store.path(case_id, f"results_{variant}.vtk").write_bytes(el.export_vtk(mesh, solution))

    def commit(doc):
        doc["stages"]["solve"][str(variant)] = {"state": "done", "rev": rev}
    store.commit(case_id, commit)


# --------------------------------------------------------------------------
# slice rendering
# --------------------------------------------------------------------------

def _render_slice(volume, axis: str, index: int, window: float, level: float):
    plane = extract_slice(volume, axis, index)
    lo = level - window / 2.0
    scaled = np.clip((plane.astype(np.float64) - lo) / window, 0.0, 1.0)
    gray = np.round(scaled * 255.0).astype(np.uint8)
    # row-major payload: rows are the second remaining axis
    return plane, gray.T.copy()


def _b64(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr).tobytes()).decode()


# --------------------------------------------------------------------------
# application
# --------------------------------------------------------------------------

def build_app(data_dir, workers: int | None = None,
              frontend_dir: Path | None = None) -> FastAPI:
    store = CaseStore(Path(data_dir))
    jobs = JobManager(workers)
    app = FastAPI(title="dentalfem case service")

    @app.exception_handler(DentalFemError)
    async def domain_error(request: Request, err: DentalFemError):
        status = 400
        for cls, code in _STATUS_BY_ERROR:
            if isinstance(err, cls):
                status = code
                break
        stage = getattr(err, "stage", None)
        return JSONResponse(status_code=status, content={
            "code": type(err).__name__, "message": str(err), "stage": stage,
        })

    @app.get("/health")
    def health():
        return {"status": "ok", "cases": len(store.list_ids())}

    @app.post("/cases")
    def create_case(metadata: dict | None = None):
        doc = store.create(metadata or {})
        return {"case_id": doc["case_id"]}

    @app.get("/cases")
    def list_cases():
        out = []
        for case_id in store.list_ids():
            doc = store.load(case_id)
            out.append({"case_id": case_id, "metadata": doc["metadata"],
                        "revision": doc["revision"]})
        return {"cases": out}

    @app.get("/cases/{case_id}")
    def get_case(case_id: str):
        return store.load(case_id)

    @app.post("/cases/{case_id}/volume")
    async def upload_volume(case_id: str, request: Request):
        body = await request.body()
        try:
            volume = read_nifti(body)  # validate before persisting
        except DentalFemError as err:
            raise _with_stage(err, "volume")
        if isinstance(volume, LabelVolume):
            raise _with_stage(ConfigurationError("upload a CT intensity volume, not labels"),
                              "volume")
        store.load(case_id)
        store.path(case_id, "volume.nii").write_bytes(body)
        summary = {
            "dims": list(volume.dims),
            "spacing": list(volume.spacing),
            "origin": list(volume.origin),
            "intensity_range": [float(volume.data.min()), float(volume.data.max())],
        }

        def fn(doc):
            doc["volume"] = summary
            _invalidate(doc, "segment")
        doc = store.mutate(case_id, fn)
        return {"volume": summary, "revision": doc["revision"]}

    @app.put("/cases/{case_id}/segmentation/params")
    def set_params(case_id: str, payload: dict):
        params = _parse_payload("params", lambda: seg.SegmentationParams(**payload))

        def fn(doc):
            doc["segmentation"]["params"] = {
                "threshold": params.threshold,
                "connectivity": params.connectivity,
                "flood_surface": params.flood_surface,
            }
            _invalidate(doc, "segment")
        doc = store.mutate(case_id, fn)
        return {"revision": doc["revision"]}

    @app.put("/cases/{case_id}/segmentation/markers")
    def set_markers(case_id: str, payload: dict):
        markers = _parse_payload("markers", lambda: wf.markers_from_doc(payload))
        doc = store.load(case_id)
        if doc["volume"] is not None:
            dims = doc["volume"]["dims"]
            for voxel, mid in markers.markers:
                if not all(0 <= c < d for c, d in zip(voxel, dims)):
                    from .errors import MarkerPlacementError
                    raise MarkerPlacementError(
                        f"marker {mid} at {list(voxel)} outside dims {dims}")

        def fn(doc):
            doc["segmentation"]["markers"] = wf.markers_to_doc(markers)
            _invalidate(doc, "segment")
        doc = store.mutate(case_id, fn)
        return {"revision": doc["revision"]}

    @app.put("/cases/{case_id}/segmentation/cuts")
    def set_cuts(case_id: str, payload: dict):
        _parse_payload("cuts", lambda: wf.cuts_from_doc(payload))

        def fn(doc):
            doc["segmentation"]["cuts"] = payload
            _invalidate(doc, "segment")
        doc = store.mutate(case_id, fn)
        return {"revision": doc["revision"]}

    @app.put("/cases/{case_id}/prostheses")
    def set_prostheses(case_id: str, payload: dict):
        variants = payload.get("variants", [])
        parsed = _parse_payload("prostheses",
                                lambda: [wf.prosthesis_from_doc(v) for v in variants])

        def fn(doc):
            doc["prostheses"] = [wf.prosthesis_to_doc(p) for p in parsed]
            _invalidate(doc, "mesh")
        doc = store.mutate(case_id, fn)
        return {"revision": doc["revision"], "variants": len(parsed)}

    @app.put("/cases/{case_id}/materials")
    def set_materials(case_id: str, payload: dict):
        _parse_payload("materials", lambda: el.parse_materials_config(payload))

        def fn(doc):
            doc["materials"] = payload
            _invalidate(doc, "solve")
        doc = store.mutate(case_id, fn)
        return {"revision": doc["revision"]}

    @app.get("/cases/{case_id}/slice")
    def get_slice(case_id: str, axis: str = "z", index: int = 0,
                  window: float = Query(400.0, gt=0), level: float = 0.0,
                  overlay: str = "none", variant: int = 0,
                  field: str = "von_mises"):
        doc = store.load(case_id)
        _require(doc["volume"] is not None, "no volume uploaded")
        volume = read_nifti(store.path(case_id, "volume.nii").read_bytes())
        plane, gray = _render_slice(volume, axis, index, window, level)
        payload = {
            "axis": axis, "index": index,
            "shape": [plane.shape[0], plane.shape[1]],  # [width, height]
            "window": window, "level": level,
            "gray": _b64(gray),
            "overlay": None,
        }
        if overlay == "threshold":
            params = doc["segmentation"]["params"]
            _require(params is not None, "no threshold set")
            mask = seg.threshold(volume, params["threshold"])
            mplane = extract_slice(mask, axis, index).astype(np.int32)
            payload["overlay"] = {"kind": "threshold", "data": _b64(mplane.T.copy()),
                                  "names": {"1": "Foreground"}}
        elif overlay == "labels":
            _require(_stage_entry(doc, "segment", "0").get("state") == "done",
                     "segmentation not computed")
            labels = read_nifti(store.path(case_id, "labels.nii").read_bytes(),
                                as_labels=True)
            lplane = extract_slice(labels, axis, index).astype(np.int32)
            payload["overlay"] = {
                "kind": "labels", "data": _b64(lplane.T.copy()),
                "names": {str(k): v for k, v in labels.label_names.items()},
            }
        elif overlay == "field":
            _require(_stage_entry(doc, "solve", str(variant)).get("state") == "done",
                     f"variant {variant} not solved")
            _, report, fields = wf.load_solution(
                store.path(case_id, f"solution_{variant}.npz"))
            if field not in fields:
                raise ConfigurationError(
                    f"unknown field {field!r}; have {sorted(fields)}")
            fragment = read_nifti(
                store.path(case_id, f"fragment_{variant}.nii").read_bytes(),
                as_labels=True)
            full = np.zeros(volume.dims, dtype=np.float32)
            offset = [int(round((fragment.origin[a] - volume.origin[a]) / volume.spacing[a]))
                      for a in range(3)]
            sl = tuple(slice(offset[a], offset[a] + fragment.dims[a]) for a in range(3))
            full[sl] = fields[field]
            fplane = np.take(full, index, axis={"x": 0, "y": 1, "z": 2}[axis])
            payload["overlay"] = {
                "kind": "field", "field": field, "data": _b64(fplane.T.astype(np.float32)),
                "range": report["field_ranges"][field],
            }
        elif overlay != "none":
            raise ConfigurationError(f"unknown overlay {overlay!r}")
        return payload

    @app.post("/cases/{case_id}/run/{stage}")
    def run_stage(case_id: str, stage: str, variant: int = 0):
        store.load(case_id)  # 404 before queuing
        if stage == "segment":
            fn = lambda job: _run_segment(store, case_id, job)
        elif stage == "mesh":
            fn = lambda job: _run_mesh(store, case_id, variant, job)
        elif stage == "solve":
            fn = lambda job: _run_solve(store, case_id, variant, job)
        else:
            raise SequencingError(f"unknown stage {stage!r}; use segment|mesh|solve")
        # sequencing violations surface synchronously for a clear 409
        doc = store.load(case_id)
        try:
            if stage == "segment":
                _require(doc["volume"] is not None, "upload a volume before segmenting")
            elif stage == "mesh":
                _require(_stage_entry(doc, "segment", "0").get("state") == "done",
                         "run segmentation before meshing")
                _require(variant < len(doc["prostheses"]),
                         f"no prosthesis variant {variant} configured")
            elif stage == "solve":
                _require(_stage_entry(doc, "mesh", str(variant)).get("state") == "done",
                         "run meshing before solving")
        except SequencingError as err:
            raise _with_stage(err, stage)
        job = jobs.submit(case_id, stage, variant, fn)
        return {"job_id": job["job_id"], "state": job["state"]}

    @app.get("/jobs/{job_id}")
    def poll_job(job_id: str):
        return jobs.poll(job_id)

    @app.get("/cases/{case_id}/variants/{variant}/results")
    def get_results(case_id: str, variant: int):
        doc = store.load(case_id)
        entry = _stage_entry(doc, "solve", str(variant))
        if entry.get("state") != "done":
            raise SequencingError(f"variant {variant} is not solved (state: "
                                  f"{entry.get('state', 'missing')})")
        _, report, fields = wf.load_solution(store.path(case_id, f"solution_{variant}.npz"))
        return {
            "variant": variant,
            "maxima": report["per_tooth_maxima"],
            "report": report,
            "fields": sorted(fields),
        }

    @app.get("/cases/{case_id}/variants/{variant}/vtk")
    def get_vtk(case_id: str, variant: int):
        doc = store.load(case_id)
        entry = _stage_entry(doc, "solve", str(variant))
        if entry.get("state") != "done":
            raise SequencingError(f"variant {variant} is not solved")
        blob = store.path(case_id, f"results_{variant}.vtk").read_bytes()
        return Response(content=blob, media_type="application/octet-stream")

    @app.get("/cases/{case_id}/compare")
    def compare(case_id: str, variants: str):
        doc = store.load(case_id)
        ids = [int(v) for v in variants.split(",") if v != ""]
        columns = {}
        for v in ids:
            entry = _stage_entry(doc, "solve", str(v))
            if entry.get("state") != "done":
                raise SequencingError(f"variant {v} is not solved")
            _, report, _ = wf.load_solution(store.path(case_id, f"solution_{v}.npz"))
            columns[str(v)] = report["per_tooth_maxima"]
        teeth = sorted({t for col in columns.values() for t in col})
        return {"variants": ids, "teeth": teeth, "columns": columns}

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
