import { afterEach, beforeEach, describe, expect, test, vi } from "vitest";

import { ApiClient, type SlicePayload } from "../src/api.js";
import { SliceViewController } from "../src/slice_view.js";
import { hydrate, initialState, setOverlay, setSlice } from "../src/state.js";
import type { CaseDoc } from "../src/api.js";

function fakeApi(log: string[]): ApiClient {
  const fetcher = async (url: string): Promise<Response> => {
    log.push(url);
    const index = Number(new URL(url, "http://t").searchParams.get("index"));
    const payload: SlicePayload = {
      axis: "z", index, shape: [1, 1], window: 400, level: 200,
      gray: Buffer.from(new Uint8Array([index])).toString("base64"), overlay: null,
    };
    return new Response(JSON.stringify(payload), { status: 200 });
  };
  return new ApiClient("http://t", fetcher);
}

const doc: CaseDoc = {
  case_id: "c1",
  metadata: { name: "", notes: "" },
  revision: 0,
  volume: { dims: [4, 4, 8], spacing: [1, 1, 1], origin: [0, 0, 0], intensity_range: [0, 100] },
  segmentation: { params: null, markers: null, cuts: null },
  prostheses: [],
  materials: null,
  stages: { segment: {}, mesh: {}, solve: {} },
};

describe("slice view controller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  test("scrubbing the slider issues exactly one request per settled index", async () => {
    const log: string[] = [];
    const shown: number[] = [];
    const view = new SliceViewController(fakeApi(log), (p) => shown.push(p.index), () => {}, 50);
    let state = hydrate(initialState(), doc);
    for (let i = 0; i < 8; i++) {
      state = setSlice(state, "z", i);
      view.view(state);
      await vi.advanceTimersByTimeAsync(60); // let each position settle
    }
    expect(log).toHaveLength(8);
    const indices = log.map((u) => Number(new URL(u).searchParams.get("index")));
    expect(indices).toEqual([0, 1, 2, 3, 4, 5, 6, 7]);
    expect(shown).toEqual([0, 1, 2, 3, 4, 5, 6, 7]);
  });

  test("rapid movement collapses to the final index", async () => {
    const log: string[] = [];
    const view = new SliceViewController(fakeApi(log), () => {}, () => {}, 50);
    let state = hydrate(initialState(), doc);
    for (let i = 0; i < 8; i++) {
      state = setSlice(state, "z", i);
      view.view(state); // no settle time between moves
    }
    await vi.advanceTimersByTimeAsync(100);
    expect(log).toHaveLength(1);
    expect(Number(new URL(log[0]!).searchParams.get("index"))).toBe(7);
  });

  test("revisiting a cached view issues no request and no mutation ever happens", async () => {
    const log: string[] = [];
    const view = new SliceViewController(fakeApi(log), () => {}, () => {}, 10);
    let state = hydrate(initialState(), doc);
    view.view(state);
    await vi.advanceTimersByTimeAsync(20);
    const toggled = setOverlay(state, "none");
    view.view(toggled); // same key -> cache hit
    await vi.advanceTimersByTimeAsync(20);
    expect(log).toHaveLength(1);
    expect(log.every((u) => !u.includes("PUT") && !u.includes("POST"))).toBe(true);
  });
});
