/**
 * ViewState: everything the page needs to redraw, reconstructible from the
 * server after a hard refresh (only an in-progress brush stroke is lost).
 */

import type { CaseDoc, VolumeSummary } from "./api.js";

export const TABS = ["Patients", "Segmentation", "Prostheses", "Calculation"] as const;
export type Tab = (typeof TABS)[number];

export type BrushMode = "internal" | "external" | "erase";
export type Overlay = "none" | "threshold" | "labels" | "field";

export interface ViewState {
  caseId: string | null;
  activeTab: Tab;
  volume: VolumeSummary | null;
  sliceAxis: "x" | "y" | "z";
  sliceIndex: number;
  window: number;
  level: number;
  overlay: Overlay;
  field: "von_mises" | "displacement";
  brushMode: BrushMode;
  selectedVariants: number[];
  stages: Record<string, Record<string, { state: string }>>;
}

export function initialState(): ViewState {
  return {
    caseId: null,
    activeTab: "Patients",
    volume: null,
    sliceAxis: "z",
    sliceIndex: 0,
    window: 400,
    level: 200,
    overlay: "none",
    field: "von_mises",
    brushMode: "internal",
    selectedVariants: [0],
    stages: {},
  };
}

export function axisLength(volume: VolumeSummary, axis: "x" | "y" | "z"): number {
  return volume.dims[{ x: 0, y: 1, z: 2 }[axis]]!;
}

/** Clamp a slice index into the volume bounds reported by the API. */
export function clampIndex(state: ViewState, index: number): number {
  if (!state.volume) return 0;
  const n = axisLength(state.volume, state.sliceAxis);
  return Math.min(Math.max(Math.round(index), 0), n - 1);
}

export function setTab(state: ViewState, tab: Tab): ViewState {
  return { ...state, activeTab: tab };
}

export function setSlice(state: ViewState, axis: "x" | "y" | "z", index: number): ViewState {
  const next = { ...state, sliceAxis: axis };
  return { ...next, sliceIndex: clampIndex(next, index) };
}

export function setWindowLevel(state: ViewState, window: number, level: number): ViewState {
  return { ...state, window: Math.max(window, 1e-6), level };
}

export function setOverlay(state: ViewState, overlay: Overlay): ViewState {
  return { ...state, overlay };
}

/** Adopt the server's view of the case: volume bounds and stage states. */
export function hydrate(state: ViewState, doc: CaseDoc): ViewState {
  const next: ViewState = {
    ...state,
    caseId: doc.case_id,
    volume: doc.volume,
    stages: doc.stages,
  };
  next.sliceIndex = clampIndex(next, next.sliceIndex);
  if (doc.volume) {
    const [lo, hi] = doc.volume.intensity_range;
    if (state.volume === null) {
      // first load: a window covering the full range
      next.window = Math.max(hi - lo, 1);
      next.level = (hi + lo) / 2;
    }
  }
  return next;
}

/** Mirror of the server's staleness rule so the UI can grey out stages
 * immediately after a mutation; the server remains the authority. */
export function markStale(state: ViewState, fromStage: "segment" | "mesh" | "solve"): ViewState {
  const order = ["segment", "mesh", "solve"];
  const stages: ViewState["stages"] = {};
  for (const [stage, table] of Object.entries(state.stages)) {
    stages[stage] = {};
    for (const [key, entry] of Object.entries(table)) {
      const stale = order.indexOf(stage) >= order.indexOf(fromStage) && entry.state === "done";
      stages[stage][key] = { state: stale ? "stale" : entry.state };
    }
  }
  return { ...state, stages };
}

export function stageState(state: ViewState, stage: string, key = "0"): string {
  return state.stages[stage]?.[key]?.state ?? "missing";
}
