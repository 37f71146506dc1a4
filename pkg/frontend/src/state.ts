/** Session state persisted per dataset so a reload restores the console. */

import type { LeaderboardRow, ModelSpecDoc } from "./types.js";

export interface Viewport {
  start: number; // epoch seconds
  end: number;
}

export interface SessionState {
  datasetId: string;
  pipeline: unknown[];
  draftSpecs: ModelSpecDoc[];
  jobIds: string[];
  selectedResults: LeaderboardRow[];
  viewport: Viewport | null;
  horizon: number;
  confidence: number;
  anomalyThreshold: number;
  anomaliesVisible: boolean;
}

const KEY_PREFIX = "forecastlab:session:";

export function emptySession(datasetId: string): SessionState {
  return {
    datasetId,
    pipeline: [],
    draftSpecs: [],
    jobIds: [],
    selectedResults: [],
    viewport: null,
    horizon: 12,
    confidence: 0.95,
    anomalyThreshold: 4.0,
    anomaliesVisible: false,
  };
}

export function saveSession(state: SessionState, storage: Storage = localStorage): void {
  storage.setItem(KEY_PREFIX + state.datasetId, JSON.stringify(state));
}

export function loadSession(
  datasetId: string,
  storage: Storage = localStorage,
): SessionState {
  const raw = storage.getItem(KEY_PREFIX + datasetId);
  if (raw === null) return emptySession(datasetId);
  try {
    const doc = JSON.parse(raw) as Partial<SessionState>;
    return { ...emptySession(datasetId), ...doc, datasetId };
  } catch {
    return emptySession(datasetId);
  }
}

export function clearSession(datasetId: string, storage: Storage = localStorage): void {
  storage.removeItem(KEY_PREFIX + datasetId);
}

/** Clamp a viewport to the joint span of data and forecast. */
export function clampViewport(view: Viewport, span: Viewport): Viewport {
  const start = Math.max(span.start, Math.min(view.start, span.end));
  const end = Math.min(span.end, Math.max(view.end, span.start));
  return start < end ? { start, end } : { ...span };
}
