"""Volume data model and NIfTI-1 round-trip tests."""

import struct

import numpy as np
import pytest

from dentalfem.errors import (
    NiftiFormatError,
    OrientationError,
    TruncatedDataError,
    UnsupportedDataTypeError,
    VolumeBoundsError,
)
from dentalfem.volume import (
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

RNG = np.random.default_rng(20240814)


def random_scalar(dims=(4, 5, 6), dtype=np.int16, spacing=(0.4, 0.5, 0.625)):
    if np.issubdtype(np.dtype(dtype), np.integer):
        info = np.iinfo(dtype)
        lo, hi = max(info.min, -1000), min(info.max, 3000)
        data = RNG.integers(lo, hi, size=dims, dtype=dtype)
    else:
        data = RNG.normal(size=dims).astype(dtype)
    return ScalarVolume(data, spacing, origin=(1.0, -2.0, 3.5))


# --------------------------------------------------------------------------
# construction invariants
# --------------------------------------------------------------------------

def test_scalar_volume_rejects_bad_grid():
    with pytest.raises(ValueError):
        ScalarVolume(np.zeros((2, 2)), (1, 1, 1))
    with pytest.raises(ValueError):
        ScalarVolume(np.zeros((2, 2, 2)), (1, 0, 1))


def test_label_volume_requires_names_for_present_labels():
    data = np.zeros((2, 2, 2), dtype=np.int16)
    data[0, 0, 0] = 3
    with pytest.raises(ValueError, match="unnamed"):
        LabelVolume(data, (1, 1, 1))
    vol = LabelVolume(data, (1, 1, 1), label_names={3: "Jaw"})
    assert vol.label_of("Jaw") == 3


def test_label_volume_rejects_negative_labels():
    data = np.full((2, 2, 2), -1, dtype=np.int8)
    with pytest.raises(ValueError, match="non-negative"):
        LabelVolume(data, (1, 1, 1), label_names={})


def test_volume_data_is_read_only():
    vol = random_scalar()
    with pytest.raises(ValueError):
        vol.data[0, 0, 0] = 1


# --------------------------------------------------------------------------
# NIfTI round trips
# --------------------------------------------------------------------------

@pytest.mark.parametrize("dtype", [np.int8, np.int16, np.int32, np.float32])
def test_nifti_round_trip_scalar(dtype):
    vol = random_scalar(dtype=dtype)
    back = read_nifti(write_nifti(vol))
    assert isinstance(back, ScalarVolume)
    assert back.dims == vol.dims
    assert back.data.dtype == np.dtype(dtype)
    assert np.array_equal(back.data, vol.data)
    assert np.allclose(back.spacing, vol.spacing)
    assert np.allclose(back.origin, vol.origin)


def test_nifti_round_trip_labels_with_names():
    data = RNG.integers(0, 4, size=(3, 4, 5)).astype(np.int32)
    names = {1: "Jaw", 2: "Tooth_14", 3: "PDL_14"}
    data[0, 0, 0] = 3  # make sure every label appears
    data[0, 1, 0] = 1
    data[0, 0, 1] = 2
    vol = LabelVolume(data, (0.3, 0.3, 0.5), (0, 0, 0), names)
    back = read_nifti(write_nifti(vol))
    assert isinstance(back, LabelVolume)
    assert np.array_equal(back.data, vol.data)
    assert back.label_names == names


def test_nifti_write_is_a_fixed_point():
    # write -> read -> write reproduces the byte payload exactly
    data = RNG.integers(0, 200, size=(3, 3, 3)).astype(np.int16)
    data[0, 0, 0] = 180
    vol = LabelVolume(data, (1, 1, 1), label_names={int(v): f"L{v}" for v in np.unique(data) if v})
    first = write_nifti(vol)
    second = write_nifti(read_nifti(first))
    assert first == second


def test_nifti_labels_use_narrowest_sufficient_type():
    data = np.zeros((2, 2, 2), dtype=np.int64)
    data[1, 1, 1] = 255
    vol = LabelVolume(data, (1, 1, 1), label_names={255: "Tooth_11"})
    blob = write_nifti(vol)
    bitpix = struct.unpack_from("<h", blob, 72)[0]
    datatype = struct.unpack_from("<h", blob, 70)[0]
    assert bitpix >= 16  # int8 cannot hold 255
    assert datatype == 4  # int16
    back = read_nifti(blob)
    assert np.array_equal(back.data, data)


def test_nifti_header_carries_spacing():
    vol = ScalarVolume(np.zeros((1, 1, 1), dtype=np.float32), (0.5, 0.5, 0.5))
    blob = write_nifti(vol)
    pixdim = struct.unpack_from("<8f", blob, 76)
    assert pixdim[1:4] == (0.5, 0.5, 0.5)


def test_nifti_rejects_bad_sizeof_hdr():
    blob = bytearray(write_nifti(random_scalar()))
    struct.pack_into("<i", blob, 0, 0)
    with pytest.raises(NiftiFormatError):
        read_nifti(bytes(blob))


def test_nifti_rejects_pair_magic():
    blob = bytearray(write_nifti(random_scalar()))
    blob[344:348] = b"ni1\x00"
    with pytest.raises(NiftiFormatError, match="two-file"):
        read_nifti(bytes(blob))


def test_nifti_rejects_unsupported_datatype():
    blob = bytearray(write_nifti(random_scalar()))
    struct.pack_into("<h", blob, 70, 64)  # float64 code
    with pytest.raises(UnsupportedDataTypeError):
        read_nifti(bytes(blob))


def test_nifti_rejects_truncated_payload():
    blob = write_nifti(random_scalar())
    with pytest.raises(TruncatedDataError):
        read_nifti(blob[:-3])


def test_nifti_rejects_oblique_sform():
    blob = bytearray(write_nifti(random_scalar()))
    struct.pack_into("<4f", blob, 280, 0.7, 0.7, 0.0, 0.0)  # rotated srow_x
    with pytest.raises(OrientationError):
        read_nifti(bytes(blob))


def test_nifti_applies_intensity_scaling():
    vol = ScalarVolume(np.arange(8, dtype=np.int16).reshape(2, 2, 2), (1, 1, 1))
    blob = bytearray(write_nifti(vol))
    struct.pack_into("<ff", blob, 112, 2.0, 10.0)  # scl_slope, scl_inter
    back = read_nifti(bytes(blob))
    assert back.data.dtype == np.float32
    assert np.array_equal(back.data, vol.data.astype(np.float32) * 2.0 + 10.0)


def test_nifti_big_endian_header_is_byte_swapped():
    vol = random_scalar(dims=(2, 3, 2), dtype=np.int16)
    le = write_nifti(vol)
    fields = struct.unpack("<i 10s 18s i h b b 8h 3f h h h h 8f f f f h b b f f f f i i 80s 24s "
                           "h h f f f f f f 4f 4f 4f 16s 4s", le[:348])
    be_header = struct.pack(">i 10s 18s i h b b 8h 3f h h h h 8f f f f h b b f f f f i i 80s 24s "
                            "h h f f f f f f 4f 4f 4f 16s 4s", *fields)
    be_payload = vol.data.ravel(order="F").astype(">i2").tobytes()
    back = read_nifti(be_header + le[348:352] + be_payload)
    assert np.array_equal(back.data, vol.data)
    assert np.allclose(back.spacing, vol.spacing)


def test_nifti_hand_constructed_float32_zeros():
    # Build the byte layout directly from the public NIfTI-1 field offsets,
    # independently of write_nifti.
    hdr = bytearray(352)
    struct.pack_into("<i", hdr, 0, 348)
    struct.pack_into("<8h", hdr, 40, 3, 3, 3, 3, 1, 1, 1, 1)
    struct.pack_into("<h", hdr, 70, 16)   # datatype float32
    struct.pack_into("<h", hdr, 72, 32)   # bitpix
    struct.pack_into("<8f", hdr, 76, 1.0, 1.0, 1.0, 1.0, 0, 0, 0, 0)
    struct.pack_into("<f", hdr, 108, 352.0)  # vox_offset
    hdr[344:348] = b"n+1\x00"
    payload = np.zeros(27, dtype=np.float32).tobytes()
    vol = read_nifti(bytes(hdr) + payload)
    assert isinstance(vol, ScalarVolume)
    assert vol.dims == (3, 3, 3)
    assert vol.data.dtype == np.float32
    assert np.count_nonzero(vol.data) == 0
    assert vol.voxel_count == 27


def test_nifti_as_labels_flag():
    data = RNG.integers(0, 3, size=(2, 2, 2)).astype(np.int16)
    data[0, 0, 0] = 2
    data[1, 0, 0] = 1
    labels = LabelVolume(data, (1, 1, 1), label_names={1: "A", 2: "B"})
    blob = write_nifti(labels)
    assert isinstance(read_nifti(blob), LabelVolume)          # intent auto-detect
    assert isinstance(read_nifti(blob, as_labels=False), ScalarVolume)
    scalar_blob = write_nifti(random_scalar(dtype=np.float32))
    with pytest.raises(NiftiFormatError, match="integer"):
        read_nifti(scalar_blob, as_labels=True)


# --------------------------------------------------------------------------
# crop
# --------------------------------------------------------------------------

def test_crop_full_extent_is_identity():
    vol = random_scalar()
    out = crop(vol, RegionOfInterest((0, 0, 0), vol.dims))
    assert np.array_equal(out.data, vol.data)
    assert out.origin == vol.origin


def test_crop_shifts_origin_and_copies_box():
    data = np.arange(64, dtype=np.int16).reshape(4, 4, 4)
    vol = ScalarVolume(data, (2.0, 3.0, 4.0), origin=(10.0, 20.0, 30.0))
    out = crop(vol, RegionOfInterest((1, 1, 1), (3, 3, 3)))
    assert out.dims == (2, 2, 2)
    assert out.origin == (12.0, 23.0, 34.0)
    assert np.array_equal(out.data, data[1:3, 1:3, 1:3])


def test_crop_composes():
    vol = random_scalar(dims=(6, 6, 6))
    once = crop(crop(vol, RegionOfInterest((1, 0, 2), (6, 5, 6))),
                RegionOfInterest((0, 1, 0), (3, 4, 2)))
    composed = crop(vol, RegionOfInterest((1, 1, 2), (4, 4, 4)))
    assert np.array_equal(once.data, composed.data)
    assert once.origin == composed.origin


def test_crop_out_of_bounds():
    vol = random_scalar(dims=(3, 3, 3))
    with pytest.raises(VolumeBoundsError):
        crop(vol, RegionOfInterest((0, 0, 0), (4, 3, 3)))


# --------------------------------------------------------------------------
# histogram
# --------------------------------------------------------------------------

def test_histogram_constant_volume():
    vol = ScalarVolume(np.full((3, 3, 3), 7, dtype=np.int16), (1, 1, 1))
    h = histogram(vol, 4)
    assert h.counts.sum() == 27
    assert np.count_nonzero(h.counts) == 1


def test_histogram_two_bins_hand_count():
    vol = ScalarVolume(np.array([0, 1, 2, 3], dtype=np.int16).reshape(4, 1, 1), (1, 1, 1))
    h = histogram(vol, 2)
    assert list(h.counts) == [2, 2]


def test_histogram_matches_counting_oracle():
    vol = random_scalar(dims=(8, 8, 8), dtype=np.int16)
    for nbins in (1, 3, 7):
        h = histogram(vol, nbins)
        assert h.counts.sum() == vol.voxel_count
        # brute-force per-voxel counting against the returned edges
        expected = np.zeros(nbins, dtype=np.int64)
        edges = h.bin_edges
        for v in vol.data.ravel():
            for b in range(nbins):
                last = b == nbins - 1
                if edges[b] <= v < edges[b + 1] or (last and v == edges[b + 1]):
                    expected[b] += 1
                    break
        assert np.array_equal(expected, h.counts)


def test_histogram_rejects_bad_nbins():
    vol = ScalarVolume(np.zeros((1, 1, 1), dtype=np.int16), (1, 1, 1))
    with pytest.raises(ValueError):
        histogram(vol, 0)


# --------------------------------------------------------------------------
# extract_slice
# --------------------------------------------------------------------------

def test_extract_slice_single_plane_volume():
    data = np.array([[[1], [2]], [[3], [4]]], dtype=np.int16)  # 2x2x1
    vol = ScalarVolume(data, (1, 1, 1))
    plane = extract_slice(vol, "z", 0)
    assert plane.shape == (2, 2)
    assert np.array_equal(plane, data[:, :, 0])


def test_extract_slice_preserves_labels():
    data = RNG.integers(0, 5, size=(4, 4, 4)).astype(np.int16)
    data[0, 0, 0] = 4
    names = {int(v): f"L{v}" for v in np.unique(data) if v}
    vol = LabelVolume(data, (1, 1, 1), label_names=names)
    plane = extract_slice(vol, "y", 2)
    assert plane.dtype == data.dtype
    assert np.array_equal(plane, data[:, 2, :])


def test_extract_slice_matches_indexing_oracle():
    vol = random_scalar(dims=(5, 4, 3))
    for axis, ax in (("x", 0), ("y", 1), ("z", 2)):
        for index in range(vol.dims[ax]):
            plane = extract_slice(vol, axis, index)
            for a in range(plane.shape[0]):
                for b in range(plane.shape[1]):
                    idx = [a, b]
                    idx.insert(ax, index)
                    assert plane[a, b] == vol.data[tuple(idx)]


def test_extract_slice_bounds():
    vol = random_scalar(dims=(2, 2, 2))
    with pytest.raises(VolumeBoundsError):
        extract_slice(vol, "x", 2)
