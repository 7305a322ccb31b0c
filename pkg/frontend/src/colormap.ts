/**
 * Display colors: one perceptually-ordered sequential colormap for field
 * overlays (dark blue -> green -> yellow, the familiar viridis ramp) and a
 * fixed categorical palette for label washes.
 *
 * Field values are mapped with the fixed [min, max] range reported by the
 * API so the same color means the same stress across variants.
 */

const VIRIDIS_ANCHORS: [number, number, number][] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

export function fieldColor(value: number, lo: number, hi: number): [number, number, number] {
  const span = hi - lo;
  const t = span > 0 ? Math.min(Math.max((value - lo) / span, 0), 1) : 0;
  const x = t * (VIRIDIS_ANCHORS.length - 1);
  const i = Math.min(Math.floor(x), VIRIDIS_ANCHORS.length - 2);
  const f = x - i;
  const a = VIRIDIS_ANCHORS[i]!;
  const b = VIRIDIS_ANCHORS[i + 1]!;
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

/** Evenly spaced legend ticks over the API-reported range, rendered verbatim
 * next to the color bar so every color is traceable to a value. */
export function legendTicks(lo: number, hi: number, count = 5): { value: number; label: string }[] {
  const ticks = [];
  for (let i = 0; i < count; i++) {
    const value = lo + ((hi - lo) * i) / (count - 1);
    ticks.push({ value, label: formatValue(value) });
  }
  return ticks;
}

/** The one number formatter the UI uses, so displayed values stay identical
 * wherever the same quantity appears. */
export function formatValue(value: number): string {
  return String(value);
}

const LABEL_PALETTE: [number, number, number][] = [
  [230, 97, 90],
  [94, 155, 230],
  [106, 191, 105],
  [218, 165, 70],
  [168, 120, 210],
  [88, 196, 186],
  [226, 132, 180],
  [160, 160, 90],
];

export function labelColor(label: number): [number, number, number] {
  return LABEL_PALETTE[(label - 1 + LABEL_PALETTE.length * 64) % LABEL_PALETTE.length]!;
}
