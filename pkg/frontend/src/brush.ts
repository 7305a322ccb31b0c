/**
 * Marker brush: strokes painted on a slice become voxel marker lists.
 *
 * Marker id 1 carries the role "Dentition-internal", id 2 "Jaw-external".
 * The model keeps the server's marker set as its baseline plus a local
 * stroke stack; undo pops the last stroke and replays the rest, and every
 * change is pushed back with a full PUT (the server is the source of
 * truth, a reload repaints from it).
 */

import type { MarkersDoc } from "./api.js";
import type { BrushMode } from "./state.js";

export const MARKER_IDS: Record<"internal" | "external", number> = { internal: 1, external: 2 };
export const MARKER_NAMES: Record<string, string> = {
  "1": "Dentition-internal",
  "2": "Jaw-external",
};

export interface Stroke {
  mode: BrushMode;
  axis: "x" | "y" | "z";
  index: number;
  /** plane points in (first remaining axis, second remaining axis) order */
  points: [number, number][];
}

/** Map a plane point on an axis-orthogonal slice to its voxel. */
export function planePointToVoxel(
  axis: "x" | "y" | "z",
  index: number,
  point: [number, number],
): [number, number, number] {
  const [a, b] = point;
  if (axis === "x") return [index, a, b];
  if (axis === "y") return [a, index, b];
  return [a, b, index];
}

function inBounds(voxel: [number, number, number], dims: [number, number, number]): boolean {
  return voxel.every((c, i) => c >= 0 && c < dims[i]!);
}

export class BrushModel {
  private baseline = new Map<string, number>(); // voxel key -> marker id
  private strokes: Stroke[] = [];

  constructor(private dims: [number, number, number]) {}

  /** Adopt the server's marker set (initial load or page reload). */
  loadFrom(doc: MarkersDoc | null): void {
    this.baseline.clear();
    this.strokes = [];
    for (const entry of doc?.markers ?? []) {
      this.baseline.set(entry.voxel.join(","), entry.id);
    }
  }

  /** Record a stroke; points outside the volume are clipped away. */
  addStroke(stroke: Stroke): void {
    this.strokes.push(stroke);
  }

  undo(): boolean {
    return this.strokes.pop() !== undefined;
  }

  eraseAll(): void {
    this.baseline.clear();
    this.strokes = [];
  }

  /** Replay baseline + strokes into the current voxel -> id map. */
  private currentMap(): Map<string, number> {
    const out = new Map(this.baseline);
    for (const stroke of this.strokes) {
      for (const point of stroke.points) {
        const voxel = planePointToVoxel(stroke.axis, stroke.index, [
          Math.round(point[0]),
          Math.round(point[1]),
        ]);
        if (!inBounds(voxel, this.dims)) continue; // clip at the volume edge
        const key = voxel.join(",");
        if (stroke.mode === "erase") out.delete(key);
        else out.set(key, MARKER_IDS[stroke.mode]);
      }
    }
    return out;
  }

  /** The full marker document to PUT after every change. */
  toDoc(): MarkersDoc {
    const markers: MarkersDoc["markers"] = [];
    const usedIds = new Set<number>();
    for (const [key, id] of this.currentMap()) {
      const voxel = key.split(",").map(Number) as [number, number, number];
      markers.push({ voxel, id });
      usedIds.add(id);
    }
    const names: Record<string, string> = {};
    for (const id of usedIds) names[String(id)] = MARKER_NAMES[String(id)]!;
    return { markers, names };
  }

  markerVoxels(): Map<string, number> {
    return this.currentMap();
  }
}
