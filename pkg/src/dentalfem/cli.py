"""Command-line driver: segment, mesh, solve, export-vtk, serve.

Every subcommand reads an optional JSON config (--config) whose fields match
the flags; explicit flags win.  Exit code 0 means the stage completed and all
output files were written; failures print the module error and exit nonzero.
Nothing in the pipeline is stochastic, so identical inputs give identical
output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import elasticity as el
from . import workflow as wf
from .errors import ConfigurationError, DentalFemError
from .volume import read_nifti, write_nifti


def _config_from_args(args) -> wf.PipelineConfig:
    cfg = wf.PipelineConfig.from_file(args.config) if args.config else wf.PipelineConfig()
    overrides = {k: getattr(args, k, None) for k in wf.PipelineConfig.__dataclass_fields__}
    return cfg.merged(**overrides)


def _out_dir(cfg) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_labels(path):
    labels = read_nifti(Path(path).read_bytes(), as_labels=True)
    return labels


def cmd_segment(args) -> int:
    cfg = _config_from_args(args)
    if cfg.input is None:
        raise ConfigurationError("segment needs an input volume (--input)")
    if cfg.markers is None:
        raise ConfigurationError("segment needs a markers file (--markers)")
    volume = read_nifti(Path(cfg.input).read_bytes(), as_labels=False)
    markers = wf.markers_from_doc(wf.read_json(cfg.markers))
    cuts = assignment = None
    if cfg.cuts is not None:
        cuts, assignment = wf.cuts_from_doc(wf.read_json(cfg.cuts))
    labels = wf.segment_stage(volume, cfg.segmentation_params(), markers, cuts, assignment)

    out = _out_dir(cfg)
    (out / "labels.nii").write_bytes(write_nifti(labels))
    counts = {name: int((labels.data == lab).sum())
              for lab, name in sorted(labels.label_names.items())}
    report = {"dims": list(labels.dims), "spacing": list(labels.spacing),
              "voxels_per_label": counts}
    (out / "segment_report.json").write_text(json.dumps(report, indent=2))
    print(f"wrote {out / 'labels.nii'} ({sum(counts.values())} labeled voxels)")
    return 0


def cmd_mesh(args) -> int:
    cfg = _config_from_args(args)
    if cfg.input is None:
        raise ConfigurationError("mesh needs an input label volume (--input)")
    if cfg.prosthesis is None:
        raise ConfigurationError("mesh needs a prosthesis spec (--prosthesis)")
    labels = _load_labels(cfg.input)
    spec = wf.prosthesis_from_doc(wf.read_json(cfg.prosthesis))
    mesh, fragment, record, warnings = wf.mesh_stage(labels, spec, cfg.margin_factor)

    out = _out_dir(cfg)
    wf.save_mesh(out / "mesh.npz", mesh)
    (out / "fragment.nii").write_bytes(write_nifti(fragment))
    (out / "mesh.vtk").write_bytes(el.export_vtk(mesh))
    report = {
        "nodes": mesh.num_nodes,
        "tets": mesh.num_tets,
        "boundary_facets": len(mesh.boundary_facets),
        "subdomains": {str(k): v for k, v in sorted(mesh.subdomain_names.items())},
        "patches": {str(k): v for k, v in sorted(mesh.patch_names.items())},
        "roi": {"lo": list(record.roi.lo), "hi": list(record.roi.hi)},
        "warnings": warnings,
    }
    (out / "mesh_report.json").write_text(json.dumps(report, indent=2))
    print(f"wrote {out / 'mesh.npz'} ({mesh.num_tets} tets, {mesh.num_nodes} nodes)")
    return 0


def cmd_solve(args) -> int:
    cfg = _config_from_args(args)
    if cfg.input is None:
        raise ConfigurationError("solve needs an input mesh container (--input)")
    if cfg.materials is None:
        raise ConfigurationError("solve needs a materials file (--materials)")
    mesh = wf.load_mesh(cfg.input)
    table, loads = el.load_materials_config(cfg.materials)
    mobility = None
    if cfg.prosthesis is not None:
        mobility = wf.prosthesis_from_doc(wf.read_json(cfg.prosthesis)).mobility_degree
    solution, report = wf.solve_stage(mesh, table, loads, cfg.solver_params(), mobility)

    out = _out_dir(cfg)
    fragment_path = Path(cfg.input).with_name("fragment.nii")
    fields = None
    if fragment_path.exists():
        fields = wf.voxel_fields(_load_labels(fragment_path), solution)
    wf.save_solution(out / "solution.npz", solution, report, fields)
    (out / "results.vtk").write_bytes(el.export_vtk(mesh, solution))
    (out / "solve_report.json").write_text(json.dumps(report, indent=2))
    with open(out / "maxima.txt", "w") as fh:
        fh.write(f"{'tooth':<16}{'max |u| (mm)':>16}{'max von Mises (MPa)':>22}\n")
        for tooth, row in report["per_tooth_maxima"].items():
            fh.write(f"{tooth:<16}{row['max_displacement']:>16.6e}"
                     f"{row['max_von_mises']:>22.6e}\n")
    print(f"wrote {out / 'solution.npz'} "
          f"({report['solver']['iterations']} iterations, "
          f"residual {report['solver']['relative_residual']:.2e})")
    return 0


def cmd_export_vtk(args) -> int:
    cfg = _config_from_args(args)
    if cfg.input is None:
        raise ConfigurationError("export-vtk needs an input mesh container (--input)")
    mesh = wf.load_mesh(cfg.input)
    solution = None
    if args.solution:
        solution, _, _ = wf.load_solution(args.solution)
    out = _out_dir(cfg)
    target = out / "export.vtk"
    target.write_bytes(el.export_vtk(mesh, solution))
    print(f"wrote {target}")
    return 0


def cmd_serve(args) -> int:
    cfg = _config_from_args(args)
    from .case_service import build_app
    import uvicorn
    host, _, port = cfg.listen.rpartition(":")
    frontend = Path("frontend/dist")
    app = build_app(Path(cfg.data_dir), workers=cfg.workers,
                    frontend_dir=frontend if frontend.is_dir() else None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dentalfem",
        description="CT-to-simulation workbench for dental prosthesis analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, solver=False):
        p.add_argument("--config", help="JSON pipeline config")
        p.add_argument("--input", help="input file for this stage")
        p.add_argument("--out-dir", dest="out_dir", help="output directory")
        if solver:
            p.add_argument("--rel-tol", dest="rel_tol", type=float,
                           help="CG relative tolerance (default 1e-8)")
            p.add_argument("--max-iter", dest="max_iter", type=int,
                           help="CG iteration cap (default 10x dofs)")

    p = sub.add_parser("segment", help="threshold + watershed + dentition cutting")
    common(p)
    p.add_argument("--threshold", type=float, help="foreground intensity threshold")
    p.add_argument("--markers", help="markers JSON file")
    p.add_argument("--cuts", help="cuts JSON file")
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("mesh", help="fragment + PDL + bridge + tetrahedra")
    common(p)
    p.add_argument("--prosthesis", help="prosthesis spec JSON file")
    p.add_argument("--margin-factor", dest="margin_factor", type=float,
                   help="jaw fragment margin in root lengths (1.5..2)")
    p.set_defaults(fn=cmd_mesh)

    p = sub.add_parser("solve", help="assemble and solve the elasticity problem")
    common(p, solver=True)
    p.add_argument("--materials", help="materials/loads JSON file")
    p.add_argument("--prosthesis", help="prosthesis spec JSON (for mobility degrees)")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("export-vtk", help="re-export a mesh/solution as legacy VTK")
    common(p)
    p.add_argument("--solution", help="solution container to include")
    p.set_defaults(fn=cmd_export_vtk)

    p = sub.add_parser("serve", help="run the HTTP case service")
    common(p)
    p.add_argument("--listen", help="host:port (default 127.0.0.1:8000)")
    p.add_argument("--workers", type=int, help="job worker threads")
    p.add_argument("--data-dir", dest="data_dir", help="case storage directory")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DentalFemError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
