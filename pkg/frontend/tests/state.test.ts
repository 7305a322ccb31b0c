import { describe, expect, test } from "vitest";

import type { CaseDoc } from "../src/api.js";
import {
  TABS,
  clampIndex,
  hydrate,
  initialState,
  markStale,
  setSlice,
  setTab,
  stageState,
} from "../src/state.js";

const caseDoc = (overrides: Partial<CaseDoc> = {}): CaseDoc => ({
  case_id: "abc",
  metadata: { name: "n", notes: "" },
  revision: 1,
  volume: {
    dims: [20, 10, 16],
    spacing: [0.5, 0.5, 0.5],
    origin: [0, 0, 0],
    intensity_range: [0, 2400],
  },
  segmentation: { params: null, markers: null, cuts: null },
  prostheses: [],
  materials: null,
  stages: { segment: { "0": { state: "done" } }, mesh: {}, solve: {} },
  ...overrides,
});

describe("view state", () => {
  test("exactly one active tab at a time", () => {
    let state = initialState();
    expect(TABS).toContain(state.activeTab);
    state = setTab(state, "Calculation");
    expect(state.activeTab).toBe("Calculation");
    expect(TABS.filter((t) => t === state.activeTab)).toHaveLength(1);
  });

  test("slice index clamps to the API-reported bounds", () => {
    let state = hydrate(initialState(), caseDoc());
    state = setSlice(state, "z", 99);
    expect(state.sliceIndex).toBe(15);
    state = setSlice(state, "z", -5);
    expect(state.sliceIndex).toBe(0);
    state = setSlice(state, "x", 19.6);
    expect(state.sliceIndex).toBe(19); // round, then clamp on the new axis
    expect(clampIndex({ ...state, volume: null }, 7)).toBe(0);
  });

  test("hydrate adopts server stage states and window over full range", () => {
    const state = hydrate(initialState(), caseDoc());
    expect(stageState(state, "segment")).toBe("done");
    expect(stageState(state, "solve")).toBe("missing");
    expect(state.window).toBe(2400);
    expect(state.level).toBe(1200);
  });

  test("markStale mirrors the downstream invalidation rule", () => {
    let state = hydrate(initialState(), caseDoc({
      stages: {
        segment: { "0": { state: "done" } },
        mesh: { "0": { state: "done" } },
        solve: { "0": { state: "done" }, "1": { state: "failed" } },
      },
    }));
    state = markStale(state, "mesh");
    expect(stageState(state, "segment")).toBe("done");
    expect(stageState(state, "mesh")).toBe("stale");
    expect(stageState(state, "solve")).toBe("stale");
    expect(stageState(state, "solve", "1")).toBe("failed"); // only done -> stale
  });
});
