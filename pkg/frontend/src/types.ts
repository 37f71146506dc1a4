/** Wire types for the forecastlab HTTP API. */

export interface DatasetRecord {
  id: string;
  name: string;
  created_at: string;
  row_count: number;
  frequency: number;
  missing_count: number;
  pipeline: unknown[];
  source_id: string | null;
}

export interface DatasetData {
  dataset_id: string;
  frequency: number;
  timestamps: number[];
  values: (number | null)[];
}

export type JobStatus = "queued" | "running" | "done" | "failed";

export interface FitJob {
  id: string;
  dataset_id: string;
  spec: ModelSpecDoc;
  status: JobStatus;
  submitted_at: string;
  started_at: string | null;
  finished_at: string | null;
  error: { code: string; message: string } | null;
  diagnostics: Record<string, unknown> | null;
}

export type ModelFamily = "arima" | "sarima" | "ets" | "lstm";

export interface ModelSpecDoc {
  family: ModelFamily;
  order?: number[];
  seasonal_order?: number[];
  ets?: { trend: string; seasonal: string; period: number };
  lstm?: {
    layers: number;
    hidden_units: number;
    window: number;
    dropout: number;
    learning_rate: number;
    epochs: number;
    batch_size: number;
    seed: number;
    clip_norm: number;
  };
  transforms?: string[];
}

export interface MetricSetDoc {
  mae: number;
  mse: number;
  rmse: number;
  mape: number | null;
  n: number;
  mape_excluded: number;
}

export interface LeaderboardRow {
  model_id: string;
  spec_digest: string;
  folds: { index: number; train_length: number; metrics: MetricSetDoc }[];
  aggregate: MetricSetDoc | null;
  fit_seconds: number;
  error: string | null;
}

export interface CompareResponse {
  api_version: string;
  leaderboard: LeaderboardRow[];
  cv: { folds: number; horizon: number };
}

export interface ForecastStep {
  timestamp: string;
  epoch: number;
  point: number;
  lower: number | null;
  upper: number | null;
}

export interface ForecastDoc {
  origin_timestamp: string;
  origin_epoch: number;
  frequency: number;
  confidence: number | null;
  intervals_available: boolean;
  model_digest: string;
  steps: ForecastStep[];
}

export interface AnomalyEventDoc {
  timestamp: string;
  epoch: number;
  observed: number;
  expected: number;
  score: number;
  direction: "spike" | "drop";
}

export interface ApiErrorBody {
  code: string;
  message: string;
  causes?: Record<string, string>;
}
