"""Voxel-volume data model, NIfTI-1 file I/O, cropping, histograms, slices.

Volumes are stored as numpy arrays of shape (nx, ny, nz) indexed
``data[i, j, k]`` with x fastest in memory order when serialized
(Fortran ravel), which matches the NIfTI on-disk layout.  Voxel (i, j, k)
occupies the axis-aligned cell from ``origin + (i,j,k)*spacing`` to
``origin + (i+1,j+1,k+1)*spacing``; its center sits at
``origin + (i+0.5, j+0.5, k+0.5)*spacing``.

Only single-file NIfTI-1 (".nii", magic "n+1\\0") is supported, axis-aligned,
native little-endian on disk with byte-swap applied when reading big-endian
headers.  Label-name maps survive round trips through a JSON header
extension (ecode 6).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    NiftiFormatError,
    OrientationError,
    TruncatedDataError,
    UnsupportedDataTypeError,
    VolumeBoundsError,
)

# NIfTI-1 header: 348 bytes, field order per the public nifti1.h layout.
_HEADER_STRUCT = struct.Struct(
    "<i 10s 18s i h b b 8h 3f h h h h 8f f f f h b b f f f f i i 80s 24s "
    "h h f f f f f f 4f 4f 4f 16s 4s"
)
assert _HEADER_STRUCT.size == 348

_MAGIC_SINGLE = b"n+1\x00"
_MAGIC_PAIR = b"ni1\x00"
_INTENT_LABEL = 1002  # NIFTI_INTENT_LABEL
_UNITS_MM = 2  # NIFTI_UNITS_MM

# datatype code <-> numpy dtype for the types this pipeline reads.
_CODE_TO_DTYPE = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    8: np.dtype(np.int32),
    16: np.dtype(np.float32),
    256: np.dtype(np.int8),
    512: np.dtype(np.uint16),
}
_DTYPE_TO_CODE = {dt: code for code, dt in _CODE_TO_DTYPE.items()}

_AXES = {"x": 0, "y": 1, "z": 2}


def _freeze(arr: np.ndarray) -> np.ndarray:
    """Return a read-only view; volumes are immutable after construction."""
    view = arr.view()
    view.flags.writeable = False
    return view


def _check_grid(data: np.ndarray, spacing, origin) -> None:
    if data.ndim != 3:
        raise ValueError(f"volume data must be 3D, got shape {data.shape}")
    if min(data.shape) < 1:
        raise ValueError(f"volume dims must be >= 1, got {data.shape}")
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise ValueError(f"spacing components must be > 0, got {spacing}")
    if len(origin) != 3:
        raise ValueError(f"origin must have 3 components, got {origin}")


@dataclass(frozen=True)
class ScalarVolume:
    """CT intensity grid with physical spacing and origin (mm)."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if not (np.issubdtype(arr.dtype, np.integer) or np.issubdtype(arr.dtype, np.floating)):
            raise ValueError(f"scalar volume needs a numeric dtype, got {arr.dtype}")
        _check_grid(arr, self.spacing, self.origin)
        object.__setattr__(self, "data", _freeze(arr))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def voxel_count(self) -> int:
        return int(self.data.size)

    def same_grid(self, other) -> bool:
        return (
            self.dims == other.dims
            and np.allclose(self.spacing, other.spacing)
            and np.allclose(self.origin, other.origin)
        )


@dataclass(frozen=True)
class LabelVolume:
    """Integer subdomain label per voxel; label 0 is background."""

    data: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    label_names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"label volume needs an integer dtype, got {arr.dtype}")
        _check_grid(arr, self.spacing, self.origin)
        if arr.size and int(arr.min()) < 0:
            raise ValueError("labels must be non-negative")
        names = {int(k): str(v) for k, v in self.label_names.items()}
        missing = [int(v) for v in np.unique(arr) if v != 0 and int(v) not in names]
        if missing:
            raise ValueError(f"labels present in data but unnamed: {missing}")
        object.__setattr__(self, "data", _freeze(arr))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "label_names", names)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def voxel_count(self) -> int:
        return int(self.data.size)

    def same_grid(self, other) -> bool:
        return (
            self.dims == other.dims
            and np.allclose(self.spacing, other.spacing)
            and np.allclose(self.origin, other.origin)
        )

    def label_of(self, name: str) -> int:
        for label, label_name in self.label_names.items():
            if label_name == name:
                return label
        raise KeyError(f"no label named {name!r}")


@dataclass(frozen=True)
class RegionOfInterest:
    """Inclusive-exclusive voxel box [lo, hi)."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if any(l < 0 for l in lo) or any(h <= l for l, h in zip(lo, hi)):
            raise ValueError(f"need 0 <= lo < hi, got lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(h - l for l, h in zip(self.lo, self.hi))


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or counts.ndim != 1 or edges.size != counts.size + 1:
            raise ValueError("need len(bin_edges) == len(counts) + 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin_edges must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "bin_edges", _freeze(edges))
        object.__setattr__(self, "counts", _freeze(counts))


# --------------------------------------------------------------------------
# NIfTI-1 reader / writer
# --------------------------------------------------------------------------

def _narrowest_label_dtype(max_label: int) -> np.dtype:
    # Narrowest signed type keeps the file readable by this reader, which
    # supports signed 8/16/32-bit integers.
    if max_label <= np.iinfo(np.int8).max:
        return np.dtype(np.int8)
    if max_label <= np.iinfo(np.int16).max:
        return np.dtype(np.int16)
    return np.dtype(np.int32)


def write_nifti(volume: ScalarVolume | LabelVolume) -> bytes:
    """Serialize a volume to single-file NIfTI-1 bytes.

    Label volumes are stored with the narrowest sufficient signed integer
    type (noted in the descrip field) and intent code 1002; their name map
    rides in a JSON header extension so reads restore it.
    """
    is_labels = isinstance(volume, LabelVolume)
    if is_labels:
        max_label = int(volume.data.max()) if volume.data.size else 0
        dtype = _narrowest_label_dtype(max_label)
        payload_arr = volume.data.astype(dtype, copy=False)
        descrip = f"labels stored as {dtype.name}".encode()
        intent_code = _INTENT_LABEL
    else:
        dtype = volume.data.dtype
        if dtype not in _DTYPE_TO_CODE:
            raise UnsupportedDataTypeError(
                f"cannot store dtype {dtype}; supported: "
                f"{sorted(dt.name for dt in _DTYPE_TO_CODE)}"
            )
        payload_arr = volume.data
        descrip = b""
        intent_code = 0

    extension = b""
    extender = b"\x00\x00\x00\x00"
    if is_labels and volume.label_names:
        doc = json.dumps({"label_names": {str(k): v for k, v in volume.label_names.items()}})
        body = doc.encode()
        esize = 8 + len(body)
        esize += (-esize) % 16  # extensions are padded to multiples of 16
        extension = struct.pack("<ii", esize, 6) + body.ljust(esize - 8, b"\x00")
        extender = b"\x01\x00\x00\x00"

    vox_offset = 352 + len(extension)
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    ox, oy, oz = volume.origin

    header = _HEADER_STRUCT.pack(
        348,                                    # sizeof_hdr
        b"", b"", 0, 0, 0, 0,                   # unused analyze fields, dim_info
        3, nx, ny, nz, 1, 1, 1, 1,              # dim
        0.0, 0.0, 0.0,                          # intent_p1..p3
        intent_code,
        _DTYPE_TO_CODE[np.dtype(payload_arr.dtype)],
        payload_arr.dtype.itemsize * 8,         # bitpix
        0,                                      # slice_start
        1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0,    # pixdim (qfac=1)
        float(vox_offset),
        1.0, 0.0,                               # scl_slope, scl_inter
        0, 0, _UNITS_MM,                        # slice_end, slice_code, xyzt_units
        0.0, 0.0, 0.0, 0.0,                     # cal_max, cal_min, slice_duration, toffset
        0, 0,                                   # glmax, glmin
        descrip, b"",
        0, 1,                                   # qform_code, sform_code
        0.0, 0.0, 0.0,                          # quatern b, c, d
        ox, oy, oz,                             # qoffsets
        sx, 0.0, 0.0, ox,                       # srow_x
        0.0, sy, 0.0, oy,                       # srow_y
        0.0, 0.0, sz, oz,                       # srow_z
        b"", _MAGIC_SINGLE,
    )
    data_le = np.ascontiguousarray(payload_arr.ravel(order="F"), dtype=payload_arr.dtype.newbyteorder("<"))
    return header + extender + extension + data_le.tobytes()


def _parse_header(raw: bytes):
    if len(raw) < 348:
        raise NiftiFormatError(f"file is {len(raw)} bytes; NIfTI-1 header needs 348")
    (size_le,) = struct.unpack("<i", raw[:4])
    (size_be,) = struct.unpack(">i", raw[:4])
    if size_le == 348:
        order = "<"
    elif size_be == 348:
        order = ">"
    else:
        raise NiftiFormatError(f"sizeof_hdr is {size_le}, expected 348")
    fmt = order + _HEADER_STRUCT.format[1:]
    fields = struct.unpack(fmt, raw[:348])
    return fields, order


def _read_label_names(raw: bytes, vox_offset: int) -> dict[int, str] | None:
    if len(raw) < 352 or raw[348] == 0:
        return None
    pos = 352
    while pos + 8 <= vox_offset:
        esize, ecode = struct.unpack("<ii", raw[pos:pos + 8])
        if esize < 8 or pos + esize > vox_offset:
            return None
        if ecode == 6:
            try:
                doc = json.loads(raw[pos + 8:pos + esize].rstrip(b"\x00").decode())
                names = doc.get("label_names")
                if isinstance(names, dict):
                    return {int(k): str(v) for k, v in names.items()}
            except (ValueError, UnicodeDecodeError):
                pass
        pos += esize
    return None


def read_nifti(raw: bytes, as_labels: bool | None = None) -> ScalarVolume | LabelVolume:
    """Decode single-file NIfTI-1 bytes.

    ``as_labels=True`` forces a LabelVolume (integer volumes only);
    ``as_labels=None`` auto-detects via the label intent code;
    ``as_labels=False`` always yields a ScalarVolume.
    """
    fields, order = _parse_header(raw)
    magic = fields[-1]
    if magic == _MAGIC_PAIR:
        raise NiftiFormatError('two-file NIfTI ("ni1") is not supported, use single-file ".nii"')
    if magic != _MAGIC_SINGLE:
        raise NiftiFormatError(f"bad magic {magic!r}, expected {_MAGIC_SINGLE!r}")

    dim = fields[7:15]
    ndim = dim[0]
    if not 1 <= ndim <= 7:
        raise NiftiFormatError(f"dim[0] must be in 1..7, got {ndim}")
    if any(d != 1 for d in dim[4:1 + ndim]):
        raise NiftiFormatError("volumes with a 4th+ dimension are not supported")
    dims = tuple(max(1, int(d)) for d in dim[1:4])
    if min(dims) < 1:
        raise NiftiFormatError(f"non-positive dims {dims}")

    intent_code = fields[18]
    datatype = fields[19]
    if datatype not in _CODE_TO_DTYPE:
        raise UnsupportedDataTypeError(f"NIfTI datatype code {datatype} unsupported")
    dtype = _CODE_TO_DTYPE[datatype]

    pixdim = fields[22:30]
    spacing = tuple(float(p) for p in pixdim[1:4])
    if any(s <= 0 for s in spacing):
        raise NiftiFormatError(f"non-positive pixdim {spacing}")

    vox_offset = int(fields[30])
    if vox_offset < 352:
        raise NiftiFormatError(f"vox_offset {vox_offset} < 352")
    scl_slope = float(fields[31])
    scl_inter = float(fields[32])

    qform_code = fields[44]
    sform_code = fields[45]
    if sform_code > 0:
        srow = np.array([fields[52:56], fields[56:60], fields[60:64]], dtype=float)
        lin = srow[:, :3]
        off_diag = lin - np.diag(np.diag(lin))
        scale = max(1.0, float(np.abs(np.diag(lin)).max()))
        if np.abs(off_diag).max() > 1e-5 * scale:
            raise OrientationError("oblique sform orientation; this pipeline needs axis-aligned volumes")
        if np.any(np.diag(lin) <= 0):
            raise OrientationError("negated sform axes; this pipeline needs positively oriented axes")
        origin = tuple(float(v) for v in srow[:, 3])
    elif qform_code > 0:
        quat = np.array(fields[46:49], dtype=float)
        if np.abs(quat).max() > 1e-6:
            raise OrientationError("rotated qform orientation; this pipeline needs axis-aligned volumes")
        origin = tuple(float(v) for v in fields[49:52])
    else:
        origin = (0.0, 0.0, 0.0)

    nbytes = int(np.prod(dims)) * dtype.itemsize
    payload = raw[vox_offset:vox_offset + nbytes]
    if len(payload) < nbytes:
        raise TruncatedDataError(
            f"payload holds {len(payload)} bytes, header promises {nbytes}"
        )
    arr = np.frombuffer(payload, dtype=dtype.newbyteorder(order)).reshape(dims, order="F")
    if order == ">":
        arr = arr.astype(dtype)

    scaled = scl_slope != 0.0 and not (scl_slope == 1.0 and scl_inter == 0.0)
    if scaled:
        arr = (arr * scl_slope + scl_inter).astype(np.float32)

    is_integer = np.issubdtype(arr.dtype, np.integer)
    want_labels = as_labels if as_labels is not None else (intent_code == _INTENT_LABEL and is_integer)
    if want_labels:
        if not is_integer:
            raise NiftiFormatError("label volume requested but voxel data is not integer-typed")
        names = _read_label_names(raw, vox_offset)
        if names is None:
            names = {int(v): f"Label_{int(v)}" for v in np.unique(arr) if v != 0}
        return LabelVolume(arr, spacing, origin, names)
    return ScalarVolume(arr, spacing, origin)


# --------------------------------------------------------------------------
# Grid operations
# --------------------------------------------------------------------------

def crop(volume: ScalarVolume | LabelVolume, roi: RegionOfInterest):
    """Crop to [roi.lo, roi.hi); the origin shifts by lo*spacing."""
    if any(h > d for h, d in zip(roi.hi, volume.dims)):
        raise VolumeBoundsError(f"roi {roi.lo}..{roi.hi} exceeds dims {volume.dims}")
    (x0, y0, z0), (x1, y1, z1) = roi.lo, roi.hi
    sub = volume.data[x0:x1, y0:y1, z0:z1].copy()
    origin = tuple(o + l * s for o, l, s in zip(volume.origin, roi.lo, volume.spacing))
    if isinstance(volume, LabelVolume):
        return LabelVolume(sub, volume.spacing, origin, volume.label_names)
    return ScalarVolume(sub, volume.spacing, origin)


def histogram(volume: ScalarVolume, nbins: int) -> Histogram:
    """Uniform-bin histogram over [min, max] of the data."""
    if nbins < 1:
        raise ValueError(f"nbins must be >= 1, got {nbins}")
    if volume.voxel_count == 0:
        raise EmptyInputError("cannot histogram an empty volume")
    counts, edges = np.histogram(volume.data, bins=nbins)
    return Histogram(edges, counts)


def extract_slice(volume: ScalarVolume | LabelVolume, axis: str, index: int) -> np.ndarray:
    """Copy one axis-orthogonal plane; no interpolation.

    The returned plane is indexed by the two remaining axes in ascending
    order, e.g. a z-slice has shape (nx, ny) with plane[i, j] = data[i, j, index].
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {sorted(_AXES)}, got {axis!r}")
    ax = _AXES[axis]
    if not 0 <= index < volume.dims[ax]:
        raise VolumeBoundsError(
            f"slice index {index} out of range 0..{volume.dims[ax] - 1} on axis {axis}"
        )
    return np.take(volume.data, index, axis=ax).copy()
