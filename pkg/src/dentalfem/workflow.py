"""End-to-end pipeline stages shared by the CLI and the case service.

Each stage is a pure function over in-memory objects; the CLI and the HTTP
service both call these, so identical inputs produce identical artifacts
through either surface.  File schemas (markers, cuts, prosthesis, pipeline
config) are small JSON documents described in the README.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import elasticity as el
from . import geometry as geo
from . import segmentation as seg
from . import volume as vol
from .errors import ConfigurationError

DEFAULT_MARGIN_FACTOR = 1.5


# --------------------------------------------------------------------------
# JSON payload parsing
# --------------------------------------------------------------------------

def markers_from_doc(doc: dict) -> seg.MarkerSet:
    """{"markers": [{"voxel": [i,j,k], "id": 1}, ...],
        "names": {"1": "Dentition-internal", "2": "Jaw-external"}}"""
    entries = tuple((tuple(int(c) for c in m["voxel"]), int(m["id"]))
                    for m in doc.get("markers", []))
    names = {int(k): str(v) for k, v in doc.get("names", {}).items()}
    return seg.MarkerSet(entries, names)


def markers_to_doc(markers: seg.MarkerSet) -> dict:
    return {
        "markers": [{"voxel": list(voxel), "id": mid} for voxel, mid in markers.markers],
        "names": {str(k): v for k, v in markers.marker_names.items()},
    }


def cuts_from_doc(doc: dict) -> tuple[list[seg.ToothCut], dict | None]:
    """{"cuts": [{"point": [...], "normal": [...]}, ...],
        "assignment": {"+-": "Tooth_14", ...}}"""
    cuts = []
    for c in doc.get("cuts", []):
        normal = np.asarray(c["normal"], dtype=float)
        norm = np.linalg.norm(normal)
        if norm == 0:
            raise ConfigurationError("cut normal must be nonzero")
        side = tuple(c["side_labels"]) if "side_labels" in c else None
        cuts.append(seg.ToothCut(tuple(float(x) for x in c["point"]),
                                 tuple(normal / norm), side))
    assignment = doc.get("assignment")
    return cuts, assignment


def prosthesis_from_doc(doc: dict) -> geo.ProsthesisSpec:
    """{"supporting_teeth": [...], "crown_thickness": mm, "pontic_gaps": [...],
        "mobility": {"Tooth_13": 1}, "pdl_thickness": {"default": 0.2}}"""
    return geo.ProsthesisSpec(
        supporting_tooth_ids=tuple(doc["supporting_teeth"]),
        crown_thickness=float(doc.get("crown_thickness", 1.0)),
        pontic_gaps=tuple(doc["pontic_gaps"]) if doc.get("pontic_gaps") is not None else None,
        mobility_degree={str(k): int(v) for k, v in doc.get("mobility", {}).items()},
        pdl_thickness={str(k): float(v) for k, v in
                       doc.get("pdl_thickness", {"default": 0.2}).items()},
    )


def prosthesis_to_doc(spec: geo.ProsthesisSpec) -> dict:
    return {
        "supporting_teeth": list(spec.supporting_tooth_ids),
        "crown_thickness": spec.crown_thickness,
        "pontic_gaps": list(spec.pontic_gaps) if spec.pontic_gaps is not None else None,
        "mobility": dict(spec.mobility_degree),
        "pdl_thickness": dict(spec.pdl_thickness),
    }


# --------------------------------------------------------------------------
# pipeline stages
# --------------------------------------------------------------------------

def segment_stage(volume: vol.ScalarVolume, params: seg.SegmentationParams,
                  markers: seg.MarkerSet, cuts=None, assignment=None) -> vol.LabelVolume:
    """Threshold, flood from markers, then cut the dentition into teeth."""
    lo, hi = float(volume.data.min()), float(volume.data.max())
    if not lo <= params.threshold <= hi:
        raise ConfigurationError(
            f"threshold {params.threshold} outside the volume's intensity "
            f"range [{lo}, {hi}]"
        )
    mask = seg.threshold(volume, params.threshold)
    if params.flood_surface == "gradient-magnitude":
        surface = seg.gradient_magnitude(volume)
    else:
        surface = volume
    labels = seg.watershed_markers(surface, mask, markers, params)
    if cuts is not None or assignment is not None:
        labels = seg.cut_dentition(labels, cuts or [], assignment)
    return labels


def mesh_stage(labels: vol.LabelVolume, prosthesis: geo.ProsthesisSpec,
               margin_factor: float = DEFAULT_MARGIN_FACTOR):
    """Fragment, ligament, bridge, tetrahedra, boundary tags.

    Returns (mesh, fragment_labels, record, warnings).  The bridge is built
    only for specs with at least two supporting teeth; single-tooth specs
    analyze the tooth without a prosthesis.  Label volumes that already
    carry a Prosthesis label keep it as-is instead of getting a generated
    bridge.
    """
    fragment, record = geo.select_fragment(labels, prosthesis, margin_factor)
    warnings = list(record.warnings)
    fragment = geo.generate_pdl(fragment, prosthesis.pdl_thickness)
    has_prosthesis = any(name.startswith("Prosthesis")
                         for name in fragment.label_names.values())
    if has_prosthesis:
        warnings.append("using the prosthesis labels supplied with the volume")
    elif len(prosthesis.supporting_tooth_ids) >= 2:
        fragment, bridge_warnings = geo.build_bridge(fragment, prosthesis)
        warnings.extend(bridge_warnings)
    else:
        warnings.append("single supporting tooth: no bridge geometry built")
    mesh = geo.voxels_to_tets(fragment)
    mesh = geo.tag_boundary(mesh, record, prosthesis)
    warnings.extend(mesh.warnings)
    return mesh, fragment, record, warnings


def solve_stage(mesh: geo.TetMesh, table: el.MaterialTable, loads: el.LoadSpec,
                solver: el.SolverParams = el.SolverParams(),
                mobility: dict[str, int] | None = None):
    """Assemble, constrain, solve, recover fields; returns (Solution, report).

    The report carries the solver counters, per-tooth maxima, per-patch areas
    and force totals, and the global equilibrium check (fixed-boundary
    reactions against the applied load).
    """
    system = el.assemble(mesh, table, mobility)
    stiffness = system.matrix  # pre-constraint operator, kept for reactions
    rhs = el.assemble_load(mesh, loads)
    system.rhs = rhs.copy()
    constrained = el.apply_dirichlet(system, el.fixed_nodes_of(mesh))
    u, solver_report = el.solve_cg(constrained, solver)

    lam, mu = el.materials_per_tet(mesh, table, mobility)
    strain = el.compute_strain(mesh, u)
    stress = el.compute_stress(strain, lam, mu)
    vm = el.von_mises(stress)
    solution = el.Solution(u=u, strain=strain, stress=stress, von_mises=vm,
                           report=solver_report)

    maxima, maxima_warnings = el.per_tooth_maxima(solution, mesh)

    areas, normals = mesh.facet_areas_normals()
    patches = {}
    for patch_id, name in mesh.patch_names.items():
        sel = mesh.facet_patch == patch_id
        load = loads.for_patch(name)
        patch_rhs = np.zeros(3)
        for f in np.flatnonzero(sel):
            t = (-load.magnitude * normals[f] if load.mode == "normal-pressure"
                 else np.asarray(load.vector))
            patch_rhs += t * areas[f]
        patches[name] = {
            "area_mm2": float(areas[sel].sum()),
            "mode": load.mode,
            "magnitude_mpa": load.magnitude if load.mode == "normal-pressure" else None,
            "vector_mpa": list(load.vector) if load.vector is not None else None,
            "total_force_n": patch_rhs.tolist(),
        }

    residual = stiffness @ u.ravel() - rhs
    reactions = residual[constrained.fixed_dofs].reshape(-1, 3).sum(axis=0)
    applied = rhs.reshape(-1, 3).sum(axis=0)
    applied_norm = float(np.linalg.norm(applied))
    eq_err = (float(np.linalg.norm(reactions + applied)) / applied_norm
              if applied_norm > 0 else 0.0)

    umag = np.linalg.norm(u, axis=1)
    report = {
        "solver": {
            "iterations": solver_report.iterations,
            "relative_residual": solver_report.relative_residual,
            "converged": solver_report.converged,
            "ndof": solver_report.ndof,
        },
        "per_tooth_maxima": maxima,
        "patches": patches,
        "totals": {
            "applied_force_n": applied.tolist(),
            "reaction_force_n": reactions.tolist(),
            "equilibrium_rel_error": eq_err,
        },
        "field_ranges": {
            "displacement": [0.0, float(umag.max())],
            "von_mises": [float(vm.min()), float(vm.max())],
        },
        "warnings": maxima_warnings,
    }
    return solution, report


def voxel_fields(fragment: vol.LabelVolume, solution: el.Solution):
    """Map element/node fields back onto the fragment's voxel grid for slice
    overlays: per voxel, the peak von Mises of its 6 tets and the peak nodal
    displacement magnitude of its 8 corners."""
    vox = np.argwhere(fragment.data != 0)
    vm = solution.von_mises.reshape(-1, 6).max(axis=1)
    umag = np.linalg.norm(solution.u, axis=1)
    corners = vox[:, None, :] + geo._CUBE_CORNERS[None, :, :]
    nx, ny, _ = fragment.dims
    keys = (corners[:, :, 0] + (nx + 1) * (corners[:, :, 1] + (ny + 1) * corners[:, :, 2]))
    unique_keys, inverse = np.unique(keys.ravel(), return_inverse=True)
    node_umag = umag[inverse.reshape(len(vox), 8)]

    vm_grid = np.zeros(fragment.dims, dtype=np.float32)
    u_grid = np.zeros(fragment.dims, dtype=np.float32)
    vm_grid[tuple(vox.T)] = vm
    u_grid[tuple(vox.T)] = node_umag.max(axis=1)
    return {"von_mises": vm_grid, "displacement": u_grid}


# --------------------------------------------------------------------------
# mesh / solution containers (.npz)
# --------------------------------------------------------------------------

def save_mesh(path, mesh: geo.TetMesh) -> None:
    np.savez_compressed(
        path,
        nodes=mesh.nodes,
        tets=mesh.tets,
        tet_labels=mesh.tet_labels,
        boundary_facets=mesh.boundary_facets,
        facet_owner=mesh.facet_owner,
        facet_tags=mesh.facet_tags,
        facet_patch=mesh.facet_patch,
        meta=json.dumps({
            "subdomain_names": {str(k): v for k, v in mesh.subdomain_names.items()},
            "patch_names": {str(k): v for k, v in mesh.patch_names.items()},
            "warnings": mesh.warnings,
        }),
    )


def load_mesh(path) -> geo.TetMesh:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        return geo.TetMesh(
            nodes=data["nodes"],
            tets=data["tets"],
            tet_labels=data["tet_labels"],
            subdomain_names={int(k): v for k, v in meta["subdomain_names"].items()},
            boundary_facets=data["boundary_facets"],
            facet_owner=data["facet_owner"],
            facet_tags=data["facet_tags"],
            facet_patch=data["facet_patch"],
            patch_names={int(k): v for k, v in meta["patch_names"].items()},
            warnings=list(meta["warnings"]),
        )


def save_solution(path, solution: el.Solution, report: dict,
                  fields: dict[str, np.ndarray] | None = None) -> None:
    arrays = {
        "u": solution.u,
        "strain": solution.strain,
        "stress": solution.stress,
        "von_mises": solution.von_mises,
        "report": json.dumps(report),
        "solver": json.dumps({
            "iterations": solution.report.iterations,
            "relative_residual": solution.report.relative_residual,
            "converged": solution.report.converged,
            "ndof": solution.report.ndof,
        }),
    }
    for name, grid in (fields or {}).items():
        arrays[f"field_{name}"] = grid
    np.savez_compressed(path, **arrays)


def load_solution(path):
    with np.load(path, allow_pickle=False) as data:
        solver = json.loads(str(data["solver"]))
        solution = el.Solution(
            u=data["u"],
            strain=data["strain"],
            stress=data["stress"],
            von_mises=data["von_mises"],
            report=el.SolverReport(
                iterations=solver["iterations"],
                relative_residual=solver["relative_residual"],
                converged=solver["converged"],
                ndof=solver["ndof"],
            ),
        )
        report = json.loads(str(data["report"]))
        fields = {key[len("field_"):]: data[key] for key in data.files
                  if key.startswith("field_")}
        return solution, report, fields


# --------------------------------------------------------------------------
# pipeline configuration (CLI)
# --------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Batch-run inputs; every field can come from the JSON config file or be
    overridden by a CLI flag.  Paths are resolved relative to the config file."""

    input: str | None = None          # NIfTI volume (segment) or labels/mesh
    out_dir: str = "out"
    threshold: float | None = None
    connectivity: int = 6
    flood_surface: str = "gradient-magnitude"
    markers: str | None = None        # markers JSON path
    cuts: str | None = None           # cuts JSON path
    prosthesis: str | None = None     # prosthesis JSON path
    materials: str | None = None      # materials/loads JSON path
    margin_factor: float = DEFAULT_MARGIN_FACTOR
    rel_tol: float = 1e-8
    max_iter: int | None = None
    preconditioner: str = "jacobi"
    workers: int | None = None
    listen: str = "127.0.0.1:8000"
    data_dir: str = "cases"

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as err:
            raise ConfigurationError(f"config {path}: {err}") from None
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"config {path}: unknown keys {sorted(unknown)}")
        cfg = cls(**doc)
        # resolve file references relative to the config location
        for attr in ("input", "markers", "cuts", "prosthesis", "materials"):
            value = getattr(cfg, attr)
            if value is not None and not Path(value).is_absolute():
                setattr(cfg, attr, str((path.parent / value).resolve()))
        return cfg

    def merged(self, **overrides) -> "PipelineConfig":
        doc = asdict(self)
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig(**doc)

    def solver_params(self) -> el.SolverParams:
        return el.SolverParams(rel_tol=self.rel_tol, max_iter=self.max_iter,
                               preconditioner=self.preconditioner)

    def segmentation_params(self) -> seg.SegmentationParams:
        if self.threshold is None:
            raise ConfigurationError("no threshold configured (set --threshold)")
        return seg.SegmentationParams(threshold=self.threshold,
                                      connectivity=self.connectivity,
                                      flood_surface=self.flood_surface)


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"{path}: {err}") from None
