"""Volume handling: NIfTI round trips, cropping, histograms, slices.

Run:  python3 demos/01_volume_io.py
"""

import numpy as np

from dentalfem import RegionOfInterest, crop, extract_slice, histogram, read_nifti, write_nifti

from common import THRESHOLD, out_dir, synthetic_scan

scan = synthetic_scan()
print(f"synthetic scan: dims={scan.dims}, spacing={scan.spacing} mm, "
      f"intensities {scan.data.min()}..{scan.data.max()}")

# --- serialize to single-file NIfTI-1 and read it back ---------------------
out = out_dir()
blob = write_nifti(scan)
(out / "scan.nii").write_bytes(blob)
back = read_nifti(blob)
assert np.array_equal(back.data, scan.data)
print(f"NIfTI round trip: {len(blob)} bytes, voxel payload identical")

# --- region of interest -----------------------------------------------------
roi = RegionOfInterest((2, 1, 0), (18, 9, 14))
cropped = crop(scan, roi)
print(f"crop {roi.lo}..{roi.hi}: dims {cropped.dims}, origin moved to "
      f"{tuple(round(o, 2) for o in cropped.origin)} mm")

# --- histogram: the bimodal intensity structure drives threshold choice ----
h = histogram(scan, 16)
peak_bins = np.argsort(h.counts)[-3:][::-1]
print("histogram (16 bins), three densest bins:")
for b in peak_bins:
    print(f"  [{h.bin_edges[b]:7.1f}, {h.bin_edges[b + 1]:7.1f}): {h.counts[b]} voxels")
print(f"a threshold near {THRESHOLD} separates background from bone+teeth")

# --- slices ------------------------------------------------------------------
mid = extract_slice(scan, "y", scan.dims[1] // 2)
rows = ["".join(".#@"[0 if v == 0 else (1 if v < 2000 else 2)] for v in col)
        for col in mid.T[::-1]]
print("mid-jaw slice (x ->, z up;  . air  # bone  @ teeth):")
print("\n".join("  " + r for r in rows))
