/**
 * Compose a slice payload into RGBA pixels: the API's 8-bit grayscale with
 * an optional translucent label wash or colormapped field on top.
 *
 * Pure pixel work only; values come from the API payload as-is.
 */

import { fieldPixels, grayPixels, labelPixels, type SlicePayload } from "./api.js";
import { fieldColor, labelColor } from "./colormap.js";

const LABEL_ALPHA = 0.45;
const FIELD_ALPHA = 0.65;

export function compositeSlice(payload: SlicePayload): {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
} {
  const [width, height] = payload.shape;
  const gray = grayPixels(payload);
  const rgba = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let p = 0; p < width * height; p++) {
    const g = gray[p]!;
    rgba[4 * p] = g;
    rgba[4 * p + 1] = g;
    rgba[4 * p + 2] = g;
    rgba[4 * p + 3] = 255;
  }
  const overlay = payload.overlay;
  if (overlay && (overlay.kind === "labels" || overlay.kind === "threshold")) {
    const labels = labelPixels(overlay);
    for (let p = 0; p < width * height; p++) {
      const lab = labels[p]!;
      if (lab === 0) continue;
      const [r, g, b] = labelColor(lab);
      rgba[4 * p] = Math.round(rgba[4 * p]! * (1 - LABEL_ALPHA) + r * LABEL_ALPHA);
      rgba[4 * p + 1] = Math.round(rgba[4 * p + 1]! * (1 - LABEL_ALPHA) + g * LABEL_ALPHA);
      rgba[4 * p + 2] = Math.round(rgba[4 * p + 2]! * (1 - LABEL_ALPHA) + b * LABEL_ALPHA);
    }
  } else if (overlay && overlay.kind === "field" && overlay.range) {
    const field = fieldPixels(overlay);
    const [lo, hi] = overlay.range;
    for (let p = 0; p < width * height; p++) {
      const value = field[p]!;
      if (value === 0) continue; // outside the meshed fragment
      const [r, g, b] = fieldColor(value, lo, hi);
      rgba[4 * p] = Math.round(rgba[4 * p]! * (1 - FIELD_ALPHA) + r * FIELD_ALPHA);
      rgba[4 * p + 1] = Math.round(rgba[4 * p + 1]! * (1 - FIELD_ALPHA) + g * FIELD_ALPHA);
      rgba[4 * p + 2] = Math.round(rgba[4 * p + 2]! * (1 - FIELD_ALPHA) + b * FIELD_ALPHA);
    }
  }
  return { width, height, rgba };
}
