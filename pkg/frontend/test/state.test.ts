/** Session persistence and viewport clamping. */

import { beforeEach, describe, expect, it } from "vitest";

import { clampViewport, emptySession, loadSession, saveSession } from "../src/state.js";

describe("session state", () => {
  beforeEach(() => localStorage.clear());

  it("round-trips through localStorage keyed by dataset id", () => {
    const state = emptySession("ds42");
    state.horizon = 24;
    state.draftSpecs.push({ family: "arima", order: [1, 0, 0] });
    state.jobIds.push("job-1");
    saveSession(state);
    const loaded = loadSession("ds42");
    expect(loaded).toEqual(state);
    expect(loadSession("other").horizon).toBe(12); // untouched dataset gets defaults
  });

  it("survives a reload cycle (fresh parse of stored JSON)", () => {
    const state = emptySession("ds1");
    state.anomalyThreshold = 6.5;
    saveSession(state);
    // simulate reload: nothing shared but the storage contents
    const restored = loadSession("ds1");
    expect(restored.anomalyThreshold).toBe(6.5);
    expect(restored.datasetId).toBe("ds1");
  });

  it("falls back to defaults on corrupted storage", () => {
    localStorage.setItem("forecastlab:session:ds9", "{nope");
    expect(loadSession("ds9")).toEqual(emptySession("ds9"));
  });

  it("clamps viewports into the data + forecast span", () => {
    const span = { start: 100, end: 200 };
    expect(clampViewport({ start: 0, end: 300 }, span)).toEqual(span);
    expect(clampViewport({ start: 120, end: 180 }, span)).toEqual({ start: 120, end: 180 });
    expect(clampViewport({ start: 250, end: 260 }, span)).toEqual(span);
  });
});
