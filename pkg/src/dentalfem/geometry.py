"""Modeling-domain construction: jaw-fragment selection, periodontal-ligament
synthesis, simplified bridge prosthesis, voxel-to-tetrahedron meshing, and
boundary tagging.

Conventions
-----------
Voxel (i, j, k) occupies the cell [origin + (i,j,k)*spacing,
origin + (i+1,j+1,k+1)*spacing]; mesh nodes live on cell corners.  The
z axis is "vertical": crowns point toward +z, roots toward -z.  Every
labeled voxel is split into 6 tetrahedra sharing the cube diagonal from
corner (0,0,0) to corner (1,1,1), which conforms across neighboring voxels
without parity bookkeeping.  The stair-step voxel boundary is kept as is;
no smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from .errors import (
    EmptyDomainError,
    MeshConformityError,
    ParameterError,
    SingularSetupError,
    SubdomainReferenceError,
)
from .volume import LabelVolume, RegionOfInterest, crop

JAW = "Jaw"
_TOOTH_PREFIX = "Tooth_"
_PDL_PREFIX = "PDL_"
_PROSTHESIS_PREFIX = "Prosthesis_"


class BoundaryTag(IntEnum):
    FREE = 1    # traction-free outer surface
    FIXED = 2   # zero displacement (jaw cut planes)
    LOADED = 3  # distributed external load patches


class SubdomainKind(IntEnum):
    JAW = 1
    PDL = 2
    TOOTH = 3
    PROSTHESIS = 4


def subdomain_kind(name: str) -> SubdomainKind:
    if name == JAW:
        return SubdomainKind.JAW
    if name.startswith("PDL"):
        return SubdomainKind.PDL
    if name.startswith("Tooth") or name == "Dentition":
        return SubdomainKind.TOOTH
    if name.startswith("Prosthesis"):
        return SubdomainKind.PROSTHESIS
    raise SubdomainReferenceError(f"cannot classify subdomain {name!r}")


def pdl_name_for(tooth_name: str) -> str:
    if tooth_name.startswith(_TOOTH_PREFIX):
        return _PDL_PREFIX + tooth_name[len(_TOOTH_PREFIX):]
    return "PDL_" + tooth_name


@dataclass(frozen=True)
class ProsthesisSpec:
    """One bridge design variant.

    mobility_degree maps tooth name -> clinical mobility grade 0..3, which
    selects the ligament material preset for that tooth at solve time.
    pdl_thickness maps tooth name -> ligament thickness in mm; the "default"
    key covers unlisted teeth.
    """

    supporting_tooth_ids: tuple[str, ...]
    crown_thickness: float = 1.0
    pontic_gaps: tuple[int, ...] | None = None  # None = every inter-support gap
    mobility_degree: dict[str, int] = field(default_factory=dict)
    pdl_thickness: dict[str, float] = field(default_factory=lambda: {"default": 0.2})

    def __post_init__(self):
        object.__setattr__(self, "supporting_tooth_ids", tuple(self.supporting_tooth_ids))
        if self.pontic_gaps is not None:
            object.__setattr__(self, "pontic_gaps", tuple(int(g) for g in self.pontic_gaps))
        if self.crown_thickness < 0:
            raise ParameterError(f"crown_thickness must be >= 0, got {self.crown_thickness}")
        for tooth, degree in self.mobility_degree.items():
            if degree not in (0, 1, 2, 3):
                raise ParameterError(f"mobility degree for {tooth} must be 0..3, got {degree}")
        for tooth, t in self.pdl_thickness.items():
            if t <= 0:
                raise ParameterError(f"pdl thickness for {tooth} must be > 0, got {t}")

    def thickness_for(self, tooth_name: str) -> float:
        if tooth_name in self.pdl_thickness:
            return float(self.pdl_thickness[tooth_name])
        if "default" in self.pdl_thickness:
            return float(self.pdl_thickness["default"])
        raise ParameterError(f"no pdl thickness for {tooth_name} and no default")


@dataclass(frozen=True)
class FragmentRecord:
    """Where the jaw fragment was cut out of the full volume."""

    roi: RegionOfInterest
    cut_faces: tuple[tuple[int, str], ...]  # (axis, "lo"/"hi") faces that truncated the jaw
    box_lo_mm: tuple[float, float, float]   # fragment grid extent in mm
    box_hi_mm: tuple[float, float, float]
    root_length_mm: float
    warnings: tuple[str, ...] = ()


@dataclass
class TetMesh:
    """Conforming P1 tetrahedral mesh with subdomain and boundary metadata."""

    nodes: np.ndarray              # (n, 3) float64, mm
    tets: np.ndarray               # (m, 4) int32, positively oriented
    tet_labels: np.ndarray         # (m,) int32 subdomain label per tet
    subdomain_names: dict[int, str]
    boundary_facets: np.ndarray    # (b, 3) int32, outward-oriented triangles
    facet_owner: np.ndarray        # (b,) int32 owning tet index
    facet_tags: np.ndarray         # (b,) int8 BoundaryTag per facet
    facet_patch: np.ndarray        # (b,) int32 load-patch id, -1 if none
    patch_names: dict[int, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    def tet_volumes(self) -> np.ndarray:
        p = self.nodes[self.tets]
        return np.linalg.det(p[:, 1:] - p[:, :1]) / 6.0

    def facet_areas_normals(self):
        """Outward unit normals and areas of the boundary facets."""
        p = self.nodes[self.boundary_facets]
        cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        norms = np.linalg.norm(cross, axis=1)
        return 0.5 * norms, cross / norms[:, None]

    def labels_of_kind(self, kind: SubdomainKind) -> list[int]:
        return sorted(lab for lab, name in self.subdomain_names.items()
                      if subdomain_kind(name) == kind)

    def audit(self, rel_tol: float = 1e-10, expected_volume: float | None = None) -> None:
        """Verify conformity: positive volumes, facet incidence, tag partition."""
        vols = self.tet_volumes()
        if np.any(vols <= 0):
            bad = int(np.argmin(vols))
            raise MeshConformityError(f"tet {bad} has volume {vols[bad]:.3e} <= 0")
        faces = self.tets[:, [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]].reshape(-1, 3)
        key = _face_keys(np.sort(faces, axis=1), self.num_nodes)
        _, counts = np.unique(key, return_counts=True)
        if np.any(counts > 2):
            raise MeshConformityError("a facet is shared by more than two tets")
        n_boundary = int((counts == 1).sum())
        if n_boundary != len(self.boundary_facets):
            raise MeshConformityError(
                f"boundary facet count mismatch: stored {len(self.boundary_facets)}, "
                f"incidence says {n_boundary}"
            )
        if not np.isin(self.facet_tags, tuple(BoundaryTag)).all():
            raise MeshConformityError("boundary tags must partition into Free/Fixed/Loaded")
        if expected_volume is not None:
            err = abs(vols.sum() - expected_volume) / expected_volume
            if err > rel_tol:
                raise MeshConformityError(
                    f"mesh volume {vols.sum():.12e} != voxel volume {expected_volume:.12e} "
                    f"(rel err {err:.2e})"
                )


def _face_keys(sorted_faces: np.ndarray, n_nodes: int) -> np.ndarray:
    f = sorted_faces.astype(np.int64)
    return (f[:, 0] * n_nodes + f[:, 1]) * n_nodes + f[:, 2]


def _freudenthal_table() -> np.ndarray:
    """6 tets per cube as corner-slot indices (slot = di + 2*dj + 4*dk),
    all sharing the 0-7 diagonal, oriented to positive volume."""
    corners = np.array([[i, j, k] for k in (0, 1) for j in (0, 1) for i in (0, 1)])
    # slot order above is x-fastest: slot = i + 2j + 4k
    paths = []
    axis_slot = {0: 1, 1: 2, 2: 4}
    import itertools
    for perm in sorted(itertools.permutations((0, 1, 2))):
        a = axis_slot[perm[0]]
        b = a + axis_slot[perm[1]]
        tet = [0, a, b, 7]
        p = corners[tet].astype(float)
        if np.linalg.det(p[1:] - p[:1]) < 0:
            tet[2], tet[3] = tet[3], tet[2]
        paths.append(tet)
    return np.array(paths, dtype=np.int64)


_FREUDENTHAL = _freudenthal_table()
_CUBE_CORNERS = np.array([[i, j, k] for k in (0, 1) for j in (0, 1) for i in (0, 1)],
                         dtype=np.int64)


# --------------------------------------------------------------------------
# fragment selection
# --------------------------------------------------------------------------

def select_fragment(
    labels: LabelVolume,
    prosthesis: ProsthesisSpec,
    margin_factor: float = 1.5,
) -> tuple[LabelVolume, FragmentRecord]:
    """Crop to the supporting teeth's bounding box expanded by
    margin_factor times the root length, and record which crop faces cut
    through the jaw (those become the fixed boundary)."""
    if not 1.5 <= margin_factor <= 2.0:
        raise ParameterError(f"margin_factor must lie in [1.5, 2], got {margin_factor}")
    tooth_labels = []
    for name in prosthesis.supporting_tooth_ids:
        try:
            tooth_labels.append(labels.label_of(name))
        except KeyError:
            raise SubdomainReferenceError(f"supporting tooth {name!r} not present") from None

    tooth_mask = np.isin(labels.data, tooth_labels)
    if not tooth_mask.any():
        raise SubdomainReferenceError("supporting teeth have no voxels")
    idx = np.argwhere(tooth_mask)
    lo = idx.min(axis=0)
    hi = idx.max(axis=0) + 1

    # crown plane = top of the teeth box; root length = vertical extent below it
    root_length = float((hi[2] - lo[2]) * labels.spacing[2])
    margin_mm = margin_factor * root_length
    margin_vox = np.array([math.ceil(margin_mm / s) for s in labels.spacing])

    warnings = []
    want_lo = lo - margin_vox
    want_hi = hi + margin_vox
    roi_lo = np.maximum(want_lo, 0)
    roi_hi = np.minimum(want_hi, labels.dims)
    for ax in range(3):
        if want_lo[ax] < 0 or want_hi[ax] > labels.dims[ax]:
            warnings.append(
                f"margin clamped to the volume on axis {'xyz'[ax]} "
                f"(wanted [{want_lo[ax]}, {want_hi[ax]}), have [0, {labels.dims[ax]}))"
            )

    roi = RegionOfInterest(tuple(int(v) for v in roi_lo), tuple(int(v) for v in roi_hi))
    fragment = crop(labels, roi)

    cut_faces = []
    try:
        jaw_label = labels.label_of(JAW)
    except KeyError:
        jaw_label = None
        warnings.append("no Jaw label: no cut faces recorded")
    if jaw_label is not None:
        for ax in range(3):
            for side, layer in (("lo", 0), ("hi", fragment.dims[ax] - 1)):
                plane = np.take(fragment.data, layer, axis=ax)
                if np.any(plane == jaw_label):
                    cut_faces.append((ax, side))

    box_lo = fragment.origin
    box_hi = tuple(o + d * s for o, d, s in zip(fragment.origin, fragment.dims, fragment.spacing))
    record = FragmentRecord(roi, tuple(cut_faces), box_lo, box_hi, root_length, tuple(warnings))
    return fragment, record


# --------------------------------------------------------------------------
# periodontal ligament synthesis
# --------------------------------------------------------------------------

def _min_distance_to_set(cand_idx: np.ndarray, pts: np.ndarray, spacing: np.ndarray,
                         chunk: int = 256) -> np.ndarray:
    """Exact min center-to-center distance from each candidate voxel to the
    point set, evaluated as ((delta index) * spacing)^2 sums."""
    out = np.empty(len(cand_idx))
    for start in range(0, len(cand_idx), chunk):
        block = cand_idx[start:start + chunk]
        deltas = (block[:, None, :] - pts[None, :, :]) * spacing
        out[start:start + chunk] = np.sqrt((deltas ** 2).sum(axis=2)).min(axis=1)
    return out


def generate_pdl(labels: LabelVolume, thickness) -> LabelVolume:
    """Relabel jaw voxels within the given distance of each tooth as that
    tooth's periodontal ligament (the ligament is invisible in CT and is
    synthesized geometrically).

    thickness: mm, either a single float or {tooth_name: mm} with an
    optional "default" key.  Ties between teeth go to the nearest tooth,
    then the lowest tooth label.
    """
    tooth_labels = sorted(
        lab for lab, name in labels.label_names.items() if name.startswith(_TOOTH_PREFIX)
    )
    if not tooth_labels:
        raise SubdomainReferenceError("no Tooth_XX labels present")
    try:
        jaw_label = labels.label_of(JAW)
    except KeyError:
        raise SubdomainReferenceError("no Jaw label present") from None

    def thickness_of(name):
        if isinstance(thickness, (int, float)):
            t = float(thickness)
        else:
            t = float(thickness.get(name, thickness.get("default", 0.0)))
        if t <= 0:
            raise ParameterError(f"pdl thickness for {name} must be > 0, got {t}")
        return t

    spacing = np.asarray(labels.spacing)
    jaw_idx = np.argwhere(labels.data == jaw_label)
    best_dist = np.full(len(jaw_idx), np.inf)
    best_tooth = np.zeros(len(jaw_idx), dtype=np.int64)

    for t in tooth_labels:
        name = labels.label_names[t]
        tau = thickness_of(name)
        pts = np.argwhere(labels.data == t)
        if len(pts) == 0:
            continue
        reach = np.array([math.ceil(tau / s) + 1 for s in labels.spacing])
        lo = pts.min(axis=0) - reach
        hi = pts.max(axis=0) + reach
        in_box = np.all((jaw_idx >= lo) & (jaw_idx <= hi), axis=1)
        cand = np.flatnonzero(in_box)
        if len(cand) == 0:
            continue
        d = _min_distance_to_set(jaw_idx[cand], pts, spacing)
        hit = cand[(d <= tau) & (d < best_dist[cand])]
        if len(hit):
            # recompute mask aligned to hit subset
            sel = (d <= tau) & (d < best_dist[cand])
            best_dist[cand[sel]] = d[sel]
            best_tooth[cand[sel]] = t

    out = labels.data.astype(np.int32)
    names = dict(labels.label_names)
    next_label = max(names, default=0) + 1
    for t in tooth_labels:
        sel = best_tooth == t
        if not sel.any():
            continue
        pdl = pdl_name_for(labels.label_names[t])
        out[tuple(jaw_idx[sel].T)] = next_label
        names[next_label] = pdl
        next_label += 1
    return LabelVolume(out, labels.spacing, labels.origin, names)


# --------------------------------------------------------------------------
# bridge prosthesis
# --------------------------------------------------------------------------

def _arch_axis_and_order(labels: LabelVolume, tooth_labels: list[int]):
    """Pick the horizontal axis with the largest centroid spread and order
    the supporting teeth along it."""
    centroids = np.array([np.argwhere(labels.data == t).mean(axis=0) for t in tooth_labels])
    spreads = centroids.max(axis=0) - centroids.min(axis=0)
    arch = int(np.argmax(spreads[:2]))
    order = np.argsort(centroids[:, arch], kind="stable")
    return arch, [tooth_labels[i] for i in order]


def build_bridge(labels: LabelVolume, spec: ProsthesisSpec) -> tuple[LabelVolume, list[str]]:
    """Add a schematic bridge: crown shells over each supporting tooth plus
    rectangular pontic prisms spanning the gaps, never overwriting existing
    labels.  Returns the augmented volume and any geometry warnings."""
    if len(spec.supporting_tooth_ids) < 2:
        raise ParameterError("a bridge needs at least 2 supporting teeth")
    tooth_labels = []
    for name in spec.supporting_tooth_ids:
        try:
            tooth_labels.append(labels.label_of(name))
        except KeyError:
            raise SubdomainReferenceError(f"supporting tooth {name!r} not present") from None

    warnings: list[str] = []
    spacing = np.asarray(labels.spacing)
    data = labels.data
    crown_top = {}   # label -> top voxel index along z
    boxes = {}       # label -> (lo, hi) inclusive voxel boxes
    for t in tooth_labels:
        pts = np.argwhere(data == t)
        if len(pts) == 0:
            raise SubdomainReferenceError(f"supporting tooth label {t} has no voxels")
        boxes[t] = (pts.min(axis=0), pts.max(axis=0))
        crown_top[t] = int(pts[:, 2].max())

    tops = np.array(list(crown_top.values()))
    if tops.max() - tops.min() > 1:
        warnings.append(
            f"supporting-tooth crowns not coplanar (top layers {sorted(set(tops.tolist()))})"
        )

    arch, ordered = _arch_axis_and_order(labels, tooth_labels)
    prosthesis = np.zeros(labels.dims, dtype=bool)

    # crown shells: unlabeled voxels within crown_thickness of the tooth, at
    # or above the crown's top voxel layer
    if spec.crown_thickness > 0:
        free_idx = np.argwhere(data == 0)
        for t in tooth_labels:
            pts = np.argwhere(data == t)
            reach = np.array([math.ceil(spec.crown_thickness / s) + 1 for s in labels.spacing])
            lo = pts.min(axis=0) - reach
            hi = pts.max(axis=0) + reach
            cand_sel = np.all((free_idx >= lo) & (free_idx <= hi), axis=1)
            cand_sel &= free_idx[:, 2] >= crown_top[t]
            cand = free_idx[cand_sel]
            if len(cand) == 0:
                continue
            d = _min_distance_to_set(cand, pts, spacing)
            shell = cand[d <= spec.crown_thickness]
            prosthesis[tuple(shell.T)] = True

    # pontic prisms between consecutive supports
    transverse = 1 - arch
    gaps = range(len(ordered) - 1) if spec.pontic_gaps is None else spec.pontic_gaps
    dz = math.ceil(spec.crown_thickness / labels.spacing[2])
    for g in gaps:
        if not 0 <= g < len(ordered) - 1:
            raise ParameterError(f"pontic gap index {g} out of range for {len(ordered)} supports")
        a, b = ordered[g], ordered[g + 1]
        arch_lo = int(boxes[a][1][arch]) + 1
        arch_hi = int(boxes[b][0][arch]) - 1
        if arch_lo > arch_hi:
            continue  # teeth touch: no pontic
        ta_lo, ta_hi = int(boxes[a][0][transverse]), int(boxes[a][1][transverse])
        tb_lo, tb_hi = int(boxes[b][0][transverse]), int(boxes[b][1][transverse])
        t_lo, t_hi = max(ta_lo, tb_lo), min(ta_hi, tb_hi)
        if t_lo > t_hi:
            t_lo, t_hi = min(ta_lo, tb_lo), max(ta_hi, tb_hi)
        z_lo = min(crown_top[a], crown_top[b])
        z_hi = max(crown_top[a], crown_top[b]) + dz
        box_lo = np.zeros(3, dtype=int)
        box_hi = np.zeros(3, dtype=int)
        box_lo[arch], box_hi[arch] = arch_lo, arch_hi
        box_lo[transverse], box_hi[transverse] = t_lo, t_hi
        box_lo[2], box_hi[2] = z_lo, z_hi
        box_lo = np.maximum(box_lo, 0)
        box_hi = np.minimum(box_hi, np.asarray(labels.dims) - 1)
        region = np.zeros(labels.dims, dtype=bool)
        region[box_lo[0]:box_hi[0] + 1, box_lo[1]:box_hi[1] + 1, box_lo[2]:box_hi[2] + 1] = True
        prosthesis |= region & (data == 0)

    out = data.astype(np.int32)
    names = dict(labels.label_names)
    existing = sum(1 for n in names.values() if n.startswith(_PROSTHESIS_PREFIX))
    if prosthesis.any():
        new_label = max(names, default=0) + 1
        out[prosthesis] = new_label
        names[new_label] = f"{_PROSTHESIS_PREFIX}{existing + 1}"
    else:
        warnings.append("prosthesis geometry came out empty")
    return LabelVolume(out, labels.spacing, labels.origin, names), warnings


# --------------------------------------------------------------------------
# voxel meshing
# --------------------------------------------------------------------------

def voxels_to_tets(labels: LabelVolume) -> TetMesh:
    """Split every labeled voxel into 6 tetrahedra (shared global diagonal),
    deduplicating corner nodes; tets inherit their voxel's label."""
    vox = np.argwhere(labels.data != 0)
    if len(vox) == 0:
        raise EmptyDomainError("no labeled voxels to mesh")
    nx, ny, nz = labels.dims
    vox_labels = labels.data[tuple(vox.T)].astype(np.int32)

    corners = vox[:, None, :] + _CUBE_CORNERS[None, :, :]       # (v, 8, 3)
    keys = (corners[:, :, 0]
            + (nx + 1) * (corners[:, :, 1] + (ny + 1) * corners[:, :, 2]))
    unique_keys, inverse = np.unique(keys.ravel(), return_inverse=True)
    corner_ids = inverse.reshape(len(vox), 8)

    ii = unique_keys % (nx + 1)
    rest = unique_keys // (nx + 1)
    jj = rest % (ny + 1)
    kk = rest // (ny + 1)
    nodes = np.stack([ii, jj, kk], axis=1).astype(np.float64)
    nodes *= np.asarray(labels.spacing)
    nodes += np.asarray(labels.origin)

    tets = corner_ids[:, _FREUDENTHAL].reshape(-1, 4).astype(np.int32)   # (6v, 4)
    tet_labels = np.repeat(vox_labels, 6)

    boundary_facets, facet_owner = _extract_boundary(tets, len(nodes), nodes)
    names = {lab: labels.label_names[lab] for lab in np.unique(vox_labels).tolist()}
    return TetMesh(
        nodes=nodes,
        tets=tets,
        tet_labels=tet_labels,
        subdomain_names=names,
        boundary_facets=boundary_facets,
        facet_owner=facet_owner,
        facet_tags=np.full(len(boundary_facets), BoundaryTag.FREE, dtype=np.int8),
        facet_patch=np.full(len(boundary_facets), -1, dtype=np.int32),
    )


def _extract_boundary(tets: np.ndarray, n_nodes: int, nodes: np.ndarray):
    faces = tets[:, [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]].reshape(-1, 3)
    sorted_faces = np.sort(faces, axis=1)
    keys = _face_keys(sorted_faces, n_nodes)
    _, first, counts = np.unique(keys, return_index=True, return_counts=True)
    if np.any(counts > 2):
        raise MeshConformityError("a facet is shared by more than two tets")
    rows = first[counts == 1]
    rows.sort()
    boundary = sorted_faces[rows].astype(np.int32)
    owner = (rows // 4).astype(np.int32)

    # orient outward: flip if the normal points toward the opposite node
    opposite = tets[owner].sum(axis=1) - boundary.sum(axis=1)
    p = nodes[boundary]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    toward = ((nodes[opposite] - p[:, 0]) * normal).sum(axis=1) > 0
    boundary[toward] = boundary[toward][:, [0, 2, 1]]
    return boundary, owner


# --------------------------------------------------------------------------
# boundary tagging
# --------------------------------------------------------------------------

def _facet_centroids(mesh: TetMesh) -> np.ndarray:
    return mesh.nodes[mesh.boundary_facets].mean(axis=1)


def _top_facets(mesh: TetMesh, owned: np.ndarray) -> np.ndarray:
    """Indices of +z-normal boundary facets at the top z level among the
    facets owned by the given tet mask."""
    _, normals = mesh.facet_areas_normals()
    up = normals[:, 2] > 0.9
    cand = np.flatnonzero(up & owned[mesh.facet_owner])
    if len(cand) == 0:
        return cand
    z = _facet_centroids(mesh)[cand, 2]
    top = z.max()
    scale = max(abs(top), 1.0)
    return cand[np.abs(z - top) <= 1e-9 * scale]


def tag_boundary(
    mesh: TetMesh,
    record: FragmentRecord | None,
    prosthesis: ProsthesisSpec | None,
) -> TetMesh:
    """Partition the boundary: recorded jaw cut planes become the fixed
    surface, the occlusal tops of the two outermost supporting teeth and the
    middle third of each pontic span become load patches, everything else is
    free."""
    tags = np.full(len(mesh.boundary_facets), BoundaryTag.FREE, dtype=np.int8)
    patch = np.full(len(mesh.boundary_facets), -1, dtype=np.int32)
    patch_names: dict[int, str] = {}
    warnings = list(mesh.warnings)

    # fixed: facets on recorded cut planes
    if record is not None:
        coords = mesh.nodes[mesh.boundary_facets]  # (b, 3, 3)
        for ax, side in record.cut_faces:
            plane = record.box_lo_mm[ax] if side == "lo" else record.box_hi_mm[ax]
            scale = max(abs(plane), 1.0)
            on_plane = np.all(np.abs(coords[:, :, ax] - plane) <= 1e-9 * scale, axis=1)
            tags[on_plane] = BoundaryTag.FIXED

    # loaded patches
    next_patch = 1
    if prosthesis is not None and prosthesis.supporting_tooth_ids:
        name_to_label = {v: k for k, v in mesh.subdomain_names.items()}
        teeth = []
        for name in prosthesis.supporting_tooth_ids:
            if name not in name_to_label:
                raise SubdomainReferenceError(f"supporting tooth {name!r} not in mesh")
            teeth.append(name_to_label[name])
        tet_centroids = mesh.nodes[mesh.tets].mean(axis=1)
        prosthesis_labels = mesh.labels_of_kind(SubdomainKind.PROSTHESIS)
        in_prosthesis = np.isin(mesh.tet_labels, prosthesis_labels)

        # order along the arch by tooth centroid
        tooth_centroid = {t: tet_centroids[mesh.tet_labels == t].mean(axis=0) for t in teeth}
        spread = np.ptp(np.array(list(tooth_centroid.values())), axis=0) if len(teeth) > 1 \
            else np.zeros(3)
        arch = int(np.argmax(spread[:2]))
        ordered = sorted(teeth, key=lambda t: tooth_centroid[t][arch])
        outer = [ordered[0], ordered[-1]] if len(ordered) > 1 else [ordered[0]]

        for t in outer:
            in_tooth = mesh.tet_labels == t
            node_box = mesh.nodes[np.unique(mesh.tets[in_tooth])]
            lo, hi = node_box.min(axis=0), node_box.max(axis=0)
            over = in_prosthesis.copy()
            for ax in (0, 1):
                over &= (tet_centroids[:, ax] >= lo[ax]) & (tet_centroids[:, ax] <= hi[ax])
            region = in_tooth | over
            top = _top_facets(mesh, region)
            if len(top):
                tags[top] = BoundaryTag.LOADED
                patch[top] = next_patch
                patch_names[next_patch] = f"crown_{mesh.subdomain_names[t]}"
                next_patch += 1

        gaps = range(len(ordered) - 1) if prosthesis.pontic_gaps is None else prosthesis.pontic_gaps
        for g in gaps:
            if not 0 <= g < max(len(ordered) - 1, 1):
                continue
            if len(ordered) < 2:
                break
            a, b = ordered[g], ordered[g + 1]
            a_hi = mesh.nodes[np.unique(mesh.tets[mesh.tet_labels == a])][:, arch].max()
            b_lo = mesh.nodes[np.unique(mesh.tets[mesh.tet_labels == b])][:, arch].min()
            if b_lo <= a_hi:
                continue
            span = b_lo - a_hi
            mid_lo, mid_hi = a_hi + span / 3.0, a_hi + 2.0 * span / 3.0
            in_mid = in_prosthesis & (tet_centroids[:, arch] >= mid_lo) \
                & (tet_centroids[:, arch] <= mid_hi)
            top = _top_facets(mesh, in_mid)
            if len(top):
                tags[top] = BoundaryTag.LOADED
                patch[top] = next_patch
                patch_names[next_patch] = f"pontic_{g}_center"
                next_patch += 1

    if not np.any(tags == BoundaryTag.FIXED):
        raise SingularSetupError(
            "no fixed boundary facets: record cut faces or tag fixed faces explicitly"
        )
    if not np.any(tags == BoundaryTag.LOADED):
        warnings.append("no load patches tagged: the solve will yield a zero field")

    return replace(mesh, facet_tags=tags, facet_patch=patch,
                   patch_names=patch_names, warnings=warnings)


def tag_axis_faces(mesh: TetMesh, fixed, loaded) -> TetMesh:
    """Tag whole bounding-box faces of the mesh, for simple box fixtures.

    fixed / loaded: iterables of (axis, "lo"/"hi") pairs; each loaded face
    becomes its own patch named "face_<axis><side>".
    """
    tags = np.full(len(mesh.boundary_facets), BoundaryTag.FREE, dtype=np.int8)
    patch = np.full(len(mesh.boundary_facets), -1, dtype=np.int32)
    patch_names: dict[int, str] = {}
    coords = mesh.nodes[mesh.boundary_facets]
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)

    def on_face(ax, side):
        plane = lo[ax] if side == "lo" else hi[ax]
        scale = max(abs(plane), 1.0)
        return np.all(np.abs(coords[:, :, ax] - plane) <= 1e-9 * scale, axis=1)

    for ax, side in fixed:
        tags[on_face(ax, side)] = BoundaryTag.FIXED
    next_patch = 1
    for ax, side in loaded:
        sel = on_face(ax, side)
        tags[sel] = BoundaryTag.LOADED
        patch[sel] = next_patch
        patch_names[next_patch] = f"face_{'xyz'[ax]}{side}"
        next_patch += 1
    if not np.any(tags == BoundaryTag.FIXED):
        raise SingularSetupError("no fixed faces tagged")
    return replace(mesh, facet_tags=tags, facet_patch=patch,
                   patch_names=patch_names, warnings=list(mesh.warnings))
