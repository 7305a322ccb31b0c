"""Threshold transform, marker-based watershed, components, dentition cutting.

The watershed follows Meyer's priority flood: the queue is seeded with the
marker voxels; the entry with the lowest flood-surface value is popped
(ties broken FIFO by insertion sequence number) and its unlabeled foreground
neighbors are claimed for the popped region and pushed.  Neighbors are
visited in a fixed documented order, so the whole transform is deterministic
for a fixed input ordering: 6-connectivity uses (-x, +x, -y, +y, -z, +z);
26-connectivity enumerates offsets in ascending lexicographic (dx, dy, dz)
order.  Voxels are always assigned to the first-claiming region; there is no
separate watershed-line label.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CutAssignmentError,
    DimensionError,
    MarkerError,
    MarkerPlacementError,
    SubdomainReferenceError,
)
from .volume import LabelVolume, ScalarVolume

_INTERNAL_SUFFIX = "-internal"
_EXTERNAL_SUFFIX = "-external"

DENTITION = "Dentition"


def neighbor_offsets(connectivity: int) -> tuple[tuple[int, int, int], ...]:
    if connectivity == 6:
        return ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1))
    if connectivity == 26:
        return tuple(
            (dx, dy, dz)
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            for dz in (-1, 0, 1)
            if (dx, dy, dz) != (0, 0, 0)
        )
    raise ValueError(f"connectivity must be 6 or 26, got {connectivity}")


@dataclass(frozen=True)
class MarkerSet:
    """User-placed seeds: (voxel, marker_id) pairs plus a name per id.

    Names carry the marker role as a suffix: "...-internal" marks the object
    of interest (the dentition), "...-external" the background side (jaw).
    The watershed region of a marker inherits the name with the role suffix
    stripped, e.g. "Dentition-internal" floods the region named "Dentition".
    """

    markers: tuple[tuple[tuple[int, int, int], int], ...]
    marker_names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple((tuple(int(c) for c in vox), int(mid)) for vox, mid in self.markers)
        names = {int(k): str(v) for k, v in self.marker_names.items()}
        for _, mid in entries:
            if mid <= 0:
                raise MarkerError(f"marker ids must be positive, got {mid}")
            if mid not in names:
                raise MarkerError(f"marker id {mid} has no entry in marker_names")
        object.__setattr__(self, "markers", entries)
        object.__setattr__(self, "marker_names", names)

    def ids_with_suffix(self, suffix: str) -> list[int]:
        return [mid for mid, name in self.marker_names.items() if name.endswith(suffix)]

    def region_name(self, marker_id: int) -> str:
        name = self.marker_names[marker_id]
        for suffix in (_INTERNAL_SUFFIX, _EXTERNAL_SUFFIX):
            if name.endswith(suffix):
                return name[: -len(suffix)]
        return name


@dataclass(frozen=True)
class SegmentationParams:
    threshold: float
    connectivity: int = 6
    flood_surface: str = "gradient-magnitude"

    def __post_init__(self):
        neighbor_offsets(self.connectivity)  # validates
        if self.flood_surface not in ("gradient-magnitude", "raw-intensity"):
            raise ValueError(f"unknown flood_surface {self.flood_surface!r}")


@dataclass(frozen=True)
class ToothCut:
    """Oriented plane splitting the dentition; point and normal in mm."""

    point: tuple[float, float, float]
    normal: tuple[float, float, float]
    side_labels: tuple[str, str] | None = None  # (negative side, positive side)

    def __post_init__(self):
        point = tuple(float(c) for c in self.point)
        normal = tuple(float(c) for c in self.normal)
        norm = float(np.linalg.norm(normal))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"cut normal must be unit length (|n|={norm:.3e})")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "normal", normal)


# --------------------------------------------------------------------------

def threshold(volume: ScalarVolume, level: float) -> LabelVolume:
    """Binary foreground mask: 1 where intensity >= level."""
    mask = (volume.data >= level).astype(np.uint8)
    names = {1: "Foreground"} if mask.any() else {}
    return LabelVolume(mask, volume.spacing, volume.origin, names)


def gradient_magnitude(volume: ScalarVolume) -> ScalarVolume:
    """Spacing-aware gradient norm: central differences inside, one-sided at faces."""
    if any(d < 2 for d in volume.dims):
        raise DimensionError(f"need dims >= 2 on every axis for differences, got {volume.dims}")
    f = volume.data.astype(np.float64)
    total = np.zeros_like(f)
    for ax in range(3):
        h = volume.spacing[ax]
        g = np.empty_like(f)
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        mid = [slice(None)] * 3
        lo[ax], hi[ax], mid[ax] = slice(0, -2), slice(2, None), slice(1, -1)
        g[tuple(mid)] = (f[tuple(hi)] - f[tuple(lo)]) / (2.0 * h)
        first = [slice(None)] * 3
        second = [slice(None)] * 3
        first[ax], second[ax] = 0, 1
        g[tuple(first)] = (f[tuple(second)] - f[tuple(first)]) / h
        last = [slice(None)] * 3
        prev = [slice(None)] * 3
        last[ax], prev[ax] = volume.dims[ax] - 1, volume.dims[ax] - 2
        g[tuple(last)] = (f[tuple(last)] - f[tuple(prev)]) / h
        total += g * g
    return ScalarVolume(np.sqrt(total), volume.spacing, volume.origin)


def watershed_markers(
    surface: ScalarVolume,
    mask: LabelVolume,
    markers: MarkerSet,
    params: SegmentationParams,
) -> LabelVolume:
    """Flood the foreground from the markers over the given surface.

    Every foreground voxel reachable from a marker receives that marker's id;
    unreachable foreground and background stay 0.
    """
    if not surface.same_grid(mask):
        raise ValueError("surface and mask must share dims, spacing, and origin")
    if not markers.ids_with_suffix(_INTERNAL_SUFFIX):
        raise MarkerError("need at least one internal (object) marker")
    if not markers.ids_with_suffix(_EXTERNAL_SUFFIX):
        raise MarkerError("need at least one external (background) marker")

    dims = mask.dims
    fg = mask.data != 0
    surf = surface.data
    labels = np.zeros(dims, dtype=np.int32)
    offsets = neighbor_offsets(params.connectivity)

    heap: list[tuple[float, int, tuple[int, int, int], int]] = []
    seq = 0
    for voxel, mid in markers.markers:
        if not all(0 <= c < d for c, d in zip(voxel, dims)):
            raise MarkerPlacementError(f"marker {mid} at {voxel} lies outside dims {dims}")
        if not fg[voxel]:
            raise MarkerPlacementError(f"marker {mid} at {voxel} sits on background")
        existing = int(labels[voxel])
        if existing and existing != mid:
            raise MarkerError(f"voxel {voxel} claimed by markers {existing} and {mid}")
        if existing:
            continue
        labels[voxel] = mid
        heapq.heappush(heap, (float(surf[voxel]), seq, voxel, mid))
        seq += 1

    nx, ny, nz = dims
    while heap:
        _, _, (i, j, k), mid = heapq.heappop(heap)
        for di, dj, dk in offsets:
            a, b, c = i + di, j + dj, k + dk
            if 0 <= a < nx and 0 <= b < ny and 0 <= c < nz and fg[a, b, c] and labels[a, b, c] == 0:
                labels[a, b, c] = mid
                heapq.heappush(heap, (float(surf[a, b, c]), seq, (a, b, c), mid))
                seq += 1

    used = {int(v) for v in np.unique(labels) if v != 0}
    names = {mid: markers.region_name(mid) for mid in used}
    return LabelVolume(labels, mask.spacing, mask.origin, names)


def connected_components(mask: LabelVolume, connectivity: int = 6) -> LabelVolume:
    """Label foreground components 1, 2, ... ordered by first voxel in
    x-fastest scan order."""
    dims = mask.dims
    fg = mask.data != 0
    labels = np.zeros(dims, dtype=np.int32)
    offsets = neighbor_offsets(connectivity)
    nx, ny, nz = dims

    next_label = 0
    for flat in np.flatnonzero(fg.ravel(order="F")):
        seed = np.unravel_index(flat, dims, order="F")
        if labels[seed]:
            continue
        next_label += 1
        labels[seed] = next_label
        stack = [tuple(int(c) for c in seed)]
        while stack:
            i, j, k = stack.pop()
            for di, dj, dk in offsets:
                a, b, c = i + di, j + dj, k + dk
                if 0 <= a < nx and 0 <= b < ny and 0 <= c < nz and fg[a, b, c] and labels[a, b, c] == 0:
                    labels[a, b, c] = next_label
                    stack.append((a, b, c))

    names = {lab: f"Component_{lab}" for lab in range(1, next_label + 1)}
    return LabelVolume(labels, mask.spacing, mask.origin, names)


# --------------------------------------------------------------------------
# dentition cutting
# --------------------------------------------------------------------------

def _normalize_pattern(key, ncuts: int) -> str:
    if isinstance(key, str):
        pattern = key
    else:
        pattern = "".join("+" if side else "-" for side in key)
    if len(pattern) != ncuts or any(ch not in "+-" for ch in pattern):
        raise CutAssignmentError(
            f"pattern {key!r} must have one +/- per cut (need {ncuts})"
        )
    return pattern


def cut_dentition(labels: LabelVolume, cuts, tooth_ids=None) -> LabelVolume:
    """Split the Dentition label into individual teeth along cut planes.

    A voxel's side pattern holds one character per cut: '+' when the voxel
    center lies on the normal side of the plane (signed distance >= 0), '-'
    otherwise.  ``tooth_ids`` maps side patterns to tooth names, e.g.
    ``{"+": "Tooth_14", "-": "Tooth_15"}``; with zero cuts the whole
    dentition maps from pattern "".  For a single cut the assignment may be
    omitted when the cut carries ``side_labels``.
    """
    cuts = list(cuts)
    try:
        dent_label = labels.label_of(DENTITION)
    except KeyError:
        raise SubdomainReferenceError("no Dentition label to cut") from None

    if tooth_ids is None:
        if len(cuts) == 1 and cuts[0].side_labels is not None:
            tooth_ids = {"-": cuts[0].side_labels[0], "+": cuts[0].side_labels[1]}
        else:
            raise CutAssignmentError("need an explicit pattern -> tooth id assignment")
    assignment = {_normalize_pattern(k, len(cuts)): str(v) for k, v in tooth_ids.items()}
    if len(set(assignment.values())) != len(assignment):
        raise CutAssignmentError("the same tooth id is assigned to two disjoint pieces")

    idx = np.argwhere(labels.data == dent_label)
    centers = (idx + 0.5) * np.asarray(labels.spacing) + np.asarray(labels.origin)

    sides = np.empty((len(idx), len(cuts)), dtype=bool)
    for c, cut in enumerate(cuts):
        sides[:, c] = (centers - np.asarray(cut.point)) @ np.asarray(cut.normal) >= 0.0

    patterns = ["".join("+" if s else "-" for s in row) for row in sides]
    present = sorted(set(patterns))
    unassigned = [p for p in present if p not in assignment]
    if unassigned:
        raise CutAssignmentError(f"pieces {unassigned} have no tooth assignment")

    new_names = dict(labels.label_names)
    del new_names[dent_label]
    next_label = max(labels.label_names, default=0) + 1
    pattern_to_label = {}
    for pattern in sorted(present, key=lambda p: assignment[p]):
        pattern_to_label[pattern] = next_label
        new_names[next_label] = assignment[pattern]
        next_label += 1

    out = labels.data.astype(np.int32)
    if len(idx):
        out[tuple(idx.T)] = [pattern_to_label[p] for p in patterns]
    return LabelVolume(out, labels.spacing, labels.origin, new_names)
