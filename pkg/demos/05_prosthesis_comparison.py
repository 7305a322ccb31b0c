"""The decision loop: solve two bridge variants and compare stress states.

Both variants share the same geometry; they differ in the mobility degree
assigned to the supporting teeth, which selects the ligament material preset
(degree 0 = healthy, stiff ligament; degree 3 = highly mobile, soft).  The
per-tooth maxima table is the quantity a prosthodontist compares across
designs: softer ligaments let the supports move more under the same bite
load.

Run:  python3 demos/05_prosthesis_comparison.py
"""

from dentalfem import export_vtk, parse_materials_config
from dentalfem.segmentation import SegmentationParams
from dentalfem.workflow import (
    cuts_from_doc,
    markers_from_doc,
    mesh_stage,
    prosthesis_from_doc,
    segment_stage,
    solve_stage,
)

from common import CUTS_DOC, MARKERS_DOC, MATERIALS_DOC, THRESHOLD, out_dir, synthetic_scan

labels = segment_stage(
    synthetic_scan(), SegmentationParams(threshold=THRESHOLD),
    markers_from_doc(MARKERS_DOC), *cuts_from_doc(CUTS_DOC),
)
table, loads = parse_materials_config(MATERIALS_DOC)

variants = {
    "firm supports (degree 0)": {"Tooth_13": 0, "Tooth_15": 0},
    "mobile supports (degree 3)": {"Tooth_13": 3, "Tooth_15": 3},
}

out = out_dir()
results = {}
for name, mobility in variants.items():
    spec = prosthesis_from_doc({
        "supporting_teeth": ["Tooth_13", "Tooth_15"],
        "crown_thickness": 0.6,
        "mobility": mobility,
        "pdl_thickness": {"default": 0.55},
    })
    mesh, fragment, record, warnings = mesh_stage(labels, spec)
    solution, report = solve_stage(mesh, table, loads, mobility=spec.mobility_degree)
    results[name] = report
    stem = "variant_" + name.split()[0]
    (out / f"{stem}.vtk").write_bytes(export_vtk(mesh, solution))
    print(f"{name}: {mesh.num_tets} tets, "
          f"{report['solver']['iterations']} CG iterations, "
          f"equilibrium error {report['totals']['equilibrium_rel_error']:.1e}")

teeth = sorted(next(iter(results.values()))["per_tooth_maxima"])
print(f"\n{'tooth':<10}" + "".join(f"{name:>30}" for name in variants))
print(f"{'':10}" + "".join(f"{'max |u| mm / max vM MPa':>30}" for _ in variants))
for tooth in teeth:
    row = f"{tooth:<10}"
    for name in variants:
        m = results[name]["per_tooth_maxima"][tooth]
        row += f"{m['max_displacement']:>16.4e} /{m['max_von_mises']:>10.2f}"
    print(row)

print(f"\nVTK files for both variants are in {out}/ for visual comparison.")
