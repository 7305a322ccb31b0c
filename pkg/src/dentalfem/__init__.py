"""dentalfem: CT volume -> labeled anatomy -> tetrahedral mesh -> static
linear-elastic stress analysis for comparing dental prosthesis designs.

The pipeline: read a CT volume (`volume`), separate dentition from jawbone
with a marker watershed and cut it into teeth (`segmentation`), build the
modeling domain with a synthesized periodontal ligament and a parametric
bridge (`geometry`), then assemble and solve the elasticity problem and
recover stress fields (`elasticity`).  `workflow` chains the stages;
`cli` and `case_service` expose them as a batch tool and an HTTP API.
"""

from .volume import (
    Histogram,
    LabelVolume,
    RegionOfInterest,
    ScalarVolume,
    crop,
    extract_slice,
    histogram,
    read_nifti,
    write_nifti,
)
from .segmentation import (
    MarkerSet,
    SegmentationParams,
    ToothCut,
    connected_components,
    cut_dentition,
    gradient_magnitude,
    threshold,
    watershed_markers,
)
from .geometry import (
    BoundaryTag,
    FragmentRecord,
    ProsthesisSpec,
    SubdomainKind,
    TetMesh,
    build_bridge,
    generate_pdl,
    select_fragment,
    tag_axis_faces,
    tag_boundary,
    voxels_to_tets,
)
from .elasticity import (
    LoadSpec,
    Material,
    MaterialTable,
    PatchLoad,
    Solution,
    SolverParams,
    SolverReport,
    SparseSystem,
    apply_dirichlet,
    assemble,
    assemble_load,
    compute_strain,
    compute_stress,
    element_stiffness,
    export_vtk,
    fixed_nodes_of,
    lame_from_engineering,
    load_materials_config,
    parse_materials_config,
    per_tooth_maxima,
    read_vtk,
    solve_cg,
    von_mises,
)
from .workflow import mesh_stage, segment_stage, solve_stage

__version__ = "0.1.0"
