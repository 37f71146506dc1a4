/** Thin typed client for the forecastlab service. All math happens
 * server-side; this module only moves JSON. */

import type {
  AnomalyEventDoc,
  ApiErrorBody,
  CompareResponse,
  DatasetData,
  DatasetRecord,
  FitJob,
  ForecastDoc,
  ModelSpecDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly causes?: Record<string, string>;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
    this.causes = body.causes;
  }
}

/** Network-level failure (server unreachable); the UI offers a retry. */
export class NetworkError extends Error {}

const POLL_START_MS = 1000;
const POLL_MAX_MS = 5000;

async function parseError(resp: Response): Promise<ApiError> {
  let body: ApiErrorBody = { code: "error", message: `HTTP ${resp.status}` };
  try {
    const doc = await resp.json();
    if (doc && doc.error) body = doc.error as ApiErrorBody;
  } catch {
    // keep the fallback body
  }
  return new ApiError(resp.status, body);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
    private readonly sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new NetworkError(err instanceof Error ? err.message : String(err));
    }
    if (!resp.ok) throw await parseError(resp);
    return resp.json();
  }

  private async requestJson(path: string, body: unknown, method = "POST"): Promise<unknown> {
    return this.request(path, {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async uploadDataset(file: File | Blob, name?: string): Promise<DatasetRecord> {
    const form = new FormData();
    form.append("file", file, name ?? "upload.csv");
    const doc = (await this.request("/datasets", { method: "POST", body: form })) as {
      dataset: DatasetRecord;
    };
    return doc.dataset;
  }

  async listDatasets(): Promise<DatasetRecord[]> {
    const doc = (await this.request("/datasets")) as { datasets: DatasetRecord[] };
    return doc.datasets;
  }

  async getDatasetData(datasetId: string): Promise<DatasetData> {
    return (await this.request(`/datasets/${datasetId}/data`)) as DatasetData;
  }

  async preprocess(datasetId: string, steps: unknown[]): Promise<DatasetRecord> {
    const doc = (await this.requestJson(`/datasets/${datasetId}/preprocess`, { steps })) as {
      dataset: DatasetRecord;
    };
    return doc.dataset;
  }

  async submitFit(datasetId: string, spec: ModelSpecDoc): Promise<FitJob> {
    const doc = (await this.requestJson("/models", { dataset_id: datasetId, spec })) as {
      job: FitJob;
    };
    return doc.job;
  }

  async getJob(jobId: string): Promise<FitJob> {
    const doc = (await this.request(`/models/${jobId}`)) as { job: FitJob };
    return doc.job;
  }

  /** Poll a job until it reaches a terminal state. Starts at a 1 s
   * interval and backs off to 5 s. */
  async pollJob(jobId: string, onUpdate?: (job: FitJob) => void): Promise<FitJob> {
    let interval = POLL_START_MS;
    for (;;) {
      const job = await this.getJob(jobId);
      onUpdate?.(job);
      if (job.status === "done" || job.status === "failed") return job;
      await this.sleep(interval);
      interval = Math.min(Math.round(interval * 1.5), POLL_MAX_MS);
    }
  }

  async forecast(jobId: string, horizon: number, confidence = 0.95): Promise<ForecastDoc> {
    const doc = (await this.requestJson(`/models/${jobId}/forecast`, {
      horizon,
      confidence,
    })) as { forecast: ForecastDoc };
    return doc.forecast;
  }

  async compare(
    datasetId: string,
    specs: ModelSpecDoc[],
    cv: { folds: number; horizon: number },
  ): Promise<CompareResponse> {
    return (await this.requestJson("/compare", {
      dataset_id: datasetId,
      specs,
      cv,
    })) as CompareResponse;
  }

  async anomalies(
    datasetId: string,
    jobId: string,
    threshold: number,
  ): Promise<AnomalyEventDoc[]> {
    const params = new URLSearchParams({ model: jobId, threshold: String(threshold) });
    const doc = (await this.request(`/datasets/${datasetId}/anomalies?${params}`)) as {
      anomalies: AnomalyEventDoc[];
    };
    return doc.anomalies;
  }
}
