"""Shared fixtures: box/bar meshes and material tables."""

import numpy as np
import pytest

from dentalfem.elasticity import LoadSpec, Material, MaterialTable, PatchLoad
from dentalfem.geometry import tag_axis_faces, voxels_to_tets
from dentalfem.volume import LabelVolume


def box_labels(dims, label=1, name="Jaw", spacing=(1.0, 1.0, 1.0)):
    data = np.full(dims, label, dtype=np.int32)
    return LabelVolume(data, spacing, (0.0, 0.0, 0.0), {label: name})


def make_bar_mesh(nz=10, spacing=1.0, section=(1, 1), fixed_face=(2, "lo"),
                  loaded_face=(2, "hi"), split_z=None, names=("Jaw", "Tooth_1")):
    """Axis-z bar of section x section x nz voxels, fixed at one end and
    loaded on the other.  split_z turns it into a two-material series bar:
    voxels below split_z carry names[0], the rest names[1]."""
    nx, ny = section
    data = np.full((nx, ny, nz), 1, dtype=np.int32)
    label_names = {1: names[0]}
    if split_z is not None:
        data[:, :, split_z:] = 2
        label_names[2] = names[1]
    labels = LabelVolume(data, (spacing, spacing, spacing), (0, 0, 0), label_names)
    mesh = voxels_to_tets(labels)
    return tag_axis_faces(mesh, fixed=[fixed_face], loaded=[loaded_face])


@pytest.fixture
def bar_mesh():
    return make_bar_mesh()


@pytest.fixture
def simple_materials():
    return MaterialTable({
        "Jaw": Material(5000.0, 0.0),
        "Tooth": Material(20000.0, 0.0),
        "PDL": Material(50.0, 0.45),
        "Prosthesis": Material(110000.0, 0.33),
    })


@pytest.fixture
def pressure_load():
    return LoadSpec(default=PatchLoad(mode="normal-pressure", magnitude=100.0))


# --------------------------------------------------------------------------
# synthetic two-teeth case used by the pipeline, service, and UI tests
# --------------------------------------------------------------------------

SAMPLE_MATERIALS = {
    "materials": {
        "Jaw": {"E": 13700.0, "nu": 0.30},
        "Tooth": {"E": 18600.0, "nu": 0.31},
        "PDL": {"E": 68.9, "nu": 0.45},
        "Prosthesis": {"E": 218000.0, "nu": 0.33},
    },
    "mobility": {
        "0": {"E": 68.9, "nu": 0.45},
        "1": {"E": 35.0, "nu": 0.45},
        "2": {"E": 15.0, "nu": 0.45},
        "3": {"E": 5.0, "nu": 0.45},
    },
    "loads": {"default": {"mode": "normal-pressure", "magnitude": 100.0}},
}


def synthetic_case():
    """CT-like phantom: jaw slab with a connected two-tooth dentition
    (teeth touch at crown level), plus the JSON payloads driving the
    pipeline on it."""
    from dentalfem.volume import ScalarVolume, write_nifti

    dims = (20, 10, 16)
    spacing = (0.5, 0.5, 0.5)
    data = np.zeros(dims, dtype=np.int16)
    data[:, :, :6] = 1200                 # jaw slab
    data[4:8, 3:7, 3:13] = 2400           # left tooth
    data[12:16, 3:7, 3:13] = 2400         # right tooth
    # proximal contact at crown level, thick enough to carry a zero-gradient
    # core so the dentition floods as one object
    data[8:12, 3:7, 9:13] = 2400
    volume = ScalarVolume(data, spacing)

    markers = {
        "markers": [{"voxel": [5, 5, 8], "id": 1}, {"voxel": [2, 5, 2], "id": 2}],
        "names": {"1": "Dentition-internal", "2": "Jaw-external"},
    }
    cuts = {
        "cuts": [{"point": [5.0, 0.0, 0.0], "normal": [1.0, 0.0, 0.0]}],
        "assignment": {"-": "Tooth_13", "+": "Tooth_15"},
    }
    variants = [
        {"supporting_teeth": ["Tooth_13", "Tooth_15"], "crown_thickness": 0.6,
         "mobility": {"Tooth_13": 0, "Tooth_15": 0},
         "pdl_thickness": {"default": 0.55}},
        {"supporting_teeth": ["Tooth_13", "Tooth_15"], "crown_thickness": 0.6,
         "mobility": {"Tooth_13": 3, "Tooth_15": 3},
         "pdl_thickness": {"default": 0.55}},
    ]
    return {
        "volume": volume,
        "nifti": write_nifti(volume),
        "threshold": 800.0,
        "markers": markers,
        "cuts": cuts,
        "variants": variants,
        "materials": SAMPLE_MATERIALS,
    }
