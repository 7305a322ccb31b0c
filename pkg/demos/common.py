"""Shared synthetic inputs for the demo scripts.

The phantom mimics a CT scan of a jaw fragment: a bright bone slab with a
connected two-tooth dentition on top (the teeth touch at the crown level,
as real teeth do on their proximal surfaces).
"""

from pathlib import Path

import numpy as np

from dentalfem import ScalarVolume

OUTPUT = Path(__file__).parent / "output"

JAW_HU = 1200
TOOTH_HU = 2400
THRESHOLD = 800.0


def synthetic_scan() -> ScalarVolume:
    dims = (20, 10, 16)
    data = np.zeros(dims, dtype=np.int16)
    data[:, :, :6] = JAW_HU                # jawbone slab
    data[4:8, 3:7, 3:13] = TOOTH_HU        # left tooth
    data[12:16, 3:7, 3:13] = TOOTH_HU      # right tooth
    data[8:12, 3:7, 9:13] = TOOTH_HU       # proximal contact at crown level
    return ScalarVolume(data, spacing=(0.5, 0.5, 0.5))


MARKERS_DOC = {
    "markers": [{"voxel": [5, 5, 8], "id": 1}, {"voxel": [2, 5, 2], "id": 2}],
    "names": {"1": "Dentition-internal", "2": "Jaw-external"},
}

CUTS_DOC = {
    "cuts": [{"point": [5.0, 0.0, 0.0], "normal": [1.0, 0.0, 0.0]}],
    "assignment": {"-": "Tooth_13", "+": "Tooth_15"},
}

MATERIALS_DOC = {
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


def out_dir() -> Path:
    OUTPUT.mkdir(exist_ok=True)
    return OUTPUT
