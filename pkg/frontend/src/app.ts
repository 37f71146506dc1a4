/** Console wiring: upload panel, model lab, and forecast explorer. The
 * browser renders and orchestrates; every number comes from the service. */

import { ApiClient, ApiError, NetworkError } from "./api.js";
import { renderChart } from "./chart.js";
import { buildForecastView } from "./forecastView.js";
import { renderLeaderboard } from "./leaderboard.js";
import { readSpecForm } from "./modelForms.js";
import { clampViewport, emptySession, loadSession, saveSession, SessionState } from "./state.js";
import type { DatasetData, FitJob, ForecastDoc, LeaderboardRow, ModelSpecDoc } from "./types.js";
import { uploadDataset, renderBanner, renderSummaryCard } from "./uploadView.js";
import { specLabel, validateSpec } from "./validate.js";

const CHART_OPTIONS = { width: 900, height: 360, padding: 40 };
const MAX_DRAFT_SPECS = 8;

interface Elements {
  fileInput: HTMLInputElement;
  uploadButton: HTMLButtonElement;
  uploadBanner: HTMLElement;
  datasetCard: HTMLElement;
  specForm: HTMLElement;
  specList: HTMLElement;
  specErrors: HTMLElement;
  compareButton: HTMLButtonElement;
  foldsInput: HTMLInputElement;
  cvHorizonInput: HTMLInputElement;
  leaderboard: HTMLElement;
  chartHost: HTMLElement;
  horizonInput: HTMLInputElement;
  confidenceInput: HTMLInputElement;
  anomalyToggle: HTMLInputElement;
  thresholdInput: HTMLInputElement;
  thresholdLabel: HTMLElement;
  forecastStatus: HTMLElement;
  legendNote: HTMLElement;
  zoomIn: HTMLButtonElement;
  zoomOut: HTMLButtonElement;
  panLeft: HTMLButtonElement;
  panRight: HTMLButtonElement;
  resetView: HTMLButtonElement;
}

function grab(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

export class ConsoleApp {
  private session: SessionState = emptySession("");
  private data: DatasetData | null = null;
  private forecast: ForecastDoc | null = null;
  private activeJob: FitJob | null = null;
  private modelLabel = "forecast";

  constructor(
    private readonly api: ApiClient,
    private readonly el: Elements,
    private readonly storage: Storage = localStorage,
  ) {}

  static fromDocument(api: ApiClient): ConsoleApp {
    const el: Elements = {
      fileInput: grab("file-input") as HTMLInputElement,
      uploadButton: grab("upload-button") as HTMLButtonElement,
      uploadBanner: grab("upload-banner"),
      datasetCard: grab("dataset-card"),
      specForm: grab("spec-form"),
      specList: grab("spec-list"),
      specErrors: grab("spec-errors"),
      compareButton: grab("compare-button") as HTMLButtonElement,
      foldsInput: grab("cv-folds") as HTMLInputElement,
      cvHorizonInput: grab("cv-horizon") as HTMLInputElement,
      leaderboard: grab("leaderboard"),
      chartHost: grab("chart-host"),
      horizonInput: grab("horizon-input") as HTMLInputElement,
      confidenceInput: grab("confidence-input") as HTMLInputElement,
      anomalyToggle: grab("anomaly-toggle") as HTMLInputElement,
      thresholdInput: grab("threshold-input") as HTMLInputElement,
      thresholdLabel: grab("threshold-label"),
      forecastStatus: grab("forecast-status"),
      legendNote: grab("legend-note"),
      zoomIn: grab("zoom-in") as HTMLButtonElement,
      zoomOut: grab("zoom-out") as HTMLButtonElement,
      panLeft: grab("pan-left") as HTMLButtonElement,
      panRight: grab("pan-right") as HTMLButtonElement,
      resetView: grab("reset-view") as HTMLButtonElement,
    };
    return new ConsoleApp(api, el);
  }

  bind(): void {
    this.el.uploadButton.addEventListener("click", () => void this.handleUpload());
    this.el.compareButton.addEventListener("click", () => void this.handleCompare());
    const addSpec = document.getElementById("add-spec-button");
    addSpec?.addEventListener("click", () => {
      this.addDraftSpec(readSpecForm(this.el.specForm));
    });
    this.el.horizonInput.addEventListener("change", () => void this.refreshForecast());
    this.el.confidenceInput.addEventListener("change", () => void this.refreshForecast());
    this.el.anomalyToggle.addEventListener("change", () => void this.refreshForecast());
    this.el.thresholdInput.addEventListener("change", () => void this.refreshForecast());
    const viewStep = (action: (v: { start: number; end: number }) => { start: number; end: number }) => {
      if (!this.session.viewport || !this.data) return;
      this.session.viewport = clampViewport(action(this.session.viewport), this.fullSpan());
      this.persist();
      void this.redraw();
    };
    this.el.zoomIn.addEventListener("click", () =>
      viewStep((v) => this.zoom(v, 0.5)));
    this.el.zoomOut.addEventListener("click", () =>
      viewStep((v) => this.zoom(v, 2.0)));
    this.el.panLeft.addEventListener("click", () =>
      viewStep((v) => ({ start: v.start - this.width(v) * 0.25, end: v.end - this.width(v) * 0.25 })));
    this.el.panRight.addEventListener("click", () =>
      viewStep((v) => ({ start: v.start + this.width(v) * 0.25, end: v.end + this.width(v) * 0.25 })));
    this.el.resetView.addEventListener("click", () => {
      this.session.viewport = null;
      this.persist();
      void this.redraw();
    });
    this.renderSpecList();
  }

  private width(v: { start: number; end: number }): number {
    return v.end - v.start;
  }

  private zoom(v: { start: number; end: number }, factor: number) {
    const mid = (v.start + v.end) / 2;
    return {
      start: mid - (this.width(v) / 2) * factor,
      end: mid + (this.width(v) / 2) * factor,
    };
  }

  private fullSpan(): { start: number; end: number } {
    const ts = this.data?.timestamps ?? [0, 1];
    const lastForecast = this.forecast?.steps.length
      ? this.forecast.steps[this.forecast.steps.length - 1]!.epoch
      : ts[ts.length - 1] ?? 1;
    return { start: ts[0] ?? 0, end: lastForecast };
  }

  private persist(): void {
    if (this.session.datasetId) saveSession(this.session, this.storage);
  }

  // -- upload --

  async handleUpload(): Promise<void> {
    const file = this.el.fileInput.files?.[0];
    if (!file) return;
    const outcome = await uploadDataset(this.api, file, file.name);
    renderBanner(this.el.uploadBanner, outcome, () => void this.handleUpload());
    if (outcome.kind !== "ok" || !outcome.record) return;
    renderSummaryCard(this.el.datasetCard, outcome.record);
    this.session = loadSession(outcome.record.id, this.storage);
    this.data = await this.api.getDatasetData(outcome.record.id);
    this.forecast = null;
    void this.redraw();
  }

  // -- model lab --

  addDraftSpec(spec: ModelSpecDoc): boolean {
    const errors = validateSpec(spec);
    this.el.specErrors.textContent = errors
      .map((e) => `${e.field}: ${e.message}`)
      .join("; ");
    if (errors.length > 0) return false;
    if (this.session.draftSpecs.length >= MAX_DRAFT_SPECS) {
      this.el.specErrors.textContent = `at most ${MAX_DRAFT_SPECS} specs per comparison`;
      return false;
    }
    this.session.draftSpecs.push(spec);
    this.persist();
    this.renderSpecList();
    return true;
  }

  removeDraftSpec(index: number): void {
    this.session.draftSpecs.splice(index, 1);
    this.persist();
    this.renderSpecList();
  }

  private renderSpecList(): void {
    this.el.specList.textContent = "";
    this.session.draftSpecs.forEach((spec, index) => {
      const item = document.createElement("li");
      item.textContent = specLabel(spec);
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.addEventListener("click", () => this.removeDraftSpec(index));
      item.appendChild(remove);
      this.el.specList.appendChild(item);
    });
  }

  async handleCompare(): Promise<void> {
    if (!this.session.datasetId || this.session.draftSpecs.length === 0) return;
    this.el.leaderboard.textContent = "comparing...";
    try {
      const response = await this.api.compare(this.session.datasetId, this.session.draftSpecs, {
        folds: Number(this.el.foldsInput.value || "5"),
        horizon: Number(this.el.cvHorizonInput.value || "12"),
      });
      this.session.selectedResults = response.leaderboard;
      this.persist();
      renderLeaderboard(this.el.leaderboard, response.leaderboard, (row) =>
        void this.promote(row),
      );
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.causes) {
          renderLeaderboard(
            this.el.leaderboard,
            Object.entries(err.causes).map(([model_id, message]) => ({
              model_id,
              spec_digest: model_id,
              folds: [],
              aggregate: null,
              fit_seconds: 0,
              error: message,
            })),
            () => undefined,
          );
        } else {
          this.el.leaderboard.textContent = `${err.code}: ${err.message}`;
        }
      } else if (err instanceof NetworkError) {
        this.el.leaderboard.textContent = `network failure: ${err.message} (retry)`;
      } else {
        throw err;
      }
    }
  }

  /** Promote a leaderboard row: fit that spec on the full dataset and open
   * the forecast view when the job completes. */
  async promote(row: LeaderboardRow): Promise<void> {
    const spec = this.session.draftSpecs.find(
      (s) => this.session.selectedResults.some(
        (r) => r.spec_digest === row.spec_digest && r.model_id === row.model_id),
    );
    const specDoc = spec ?? this.specFromRow(row);
    if (!specDoc) return;
    this.el.forecastStatus.textContent = `fitting ${row.model_id}...`;
    const job = await this.api.submitFit(this.session.datasetId, specDoc);
    this.session.jobIds.push(job.id);
    this.persist();
    const finished = await this.api.pollJob(job.id, (j) => {
      this.el.forecastStatus.textContent = `job ${j.id}: ${j.status}`;
    });
    if (finished.status === "failed") {
      this.el.forecastStatus.textContent = `fit failed: ${finished.error?.message ?? "unknown"}`;
      return;
    }
    this.activeJob = finished;
    this.modelLabel = row.model_id;
    await this.refreshForecast();
  }

  private specFromRow(row: LeaderboardRow): ModelSpecDoc | null {
    const match = this.session.draftSpecs.find((s) => specLabel(s) === row.model_id);
    return match ?? null;
  }

  // -- forecast view --

  async refreshForecast(): Promise<void> {
    if (!this.activeJob || !this.data) {
      void this.redraw();
      return;
    }
    this.session.horizon = Number(this.el.horizonInput.value || "12");
    this.session.confidence = Number(this.el.confidenceInput.value || "0.95");
    this.session.anomaliesVisible = this.el.anomalyToggle.checked;
    this.session.anomalyThreshold = Number(this.el.thresholdInput.value || "4");
    this.el.thresholdLabel.textContent = String(this.session.anomalyThreshold);
    this.persist();
    try {
      this.forecast = await this.api.forecast(
        this.activeJob.id,
        this.session.horizon,
        this.session.confidence,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.el.forecastStatus.textContent = "job still running...";
        const job = await this.api.pollJob(this.activeJob.id);
        if (job.status === "done") {
          this.activeJob = job;
          return this.refreshForecast();
        }
        this.el.forecastStatus.textContent = `fit failed: ${job.error?.message ?? "unknown"}`;
        return;
      }
      throw err;
    }
    this.el.forecastStatus.textContent = "";
    void this.redraw();
  }

  async redraw(): Promise<void> {
    if (!this.data) return;
    let anomalies = [] as Awaited<ReturnType<ApiClient["anomalies"]>>;
    if (this.session.anomaliesVisible && this.activeJob) {
      anomalies = await this.api.anomalies(
        this.session.datasetId,
        this.activeJob.id,
        this.session.anomalyThreshold,
      );
    }
    const view = buildForecastView(this.data, this.forecast, anomalies, this.modelLabel);
    this.el.legendNote.textContent = view.intervalsNote ?? "";
    const viewport = this.session.viewport
      ? clampViewport(this.session.viewport, view.span)
      : null;
    const svg = renderChart(view.series, { ...CHART_OPTIONS, viewport });
    this.el.chartHost.textContent = "";
    this.el.chartHost.appendChild(svg);
  }
}

export function bootstrap(baseUrl = ""): ConsoleApp {
  const app = ConsoleApp.fromDocument(new ApiClient(baseUrl));
  app.bind();
  return app;
}
