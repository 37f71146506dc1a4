/** Dataset upload flow: POST the file, then show a summary card or the
 * server's row-level error verbatim. */

import { ApiClient, ApiError, NetworkError } from "./api.js";
import type { DatasetRecord } from "./types.js";

export interface UploadOutcome {
  kind: "ok" | "error" | "retryable";
  record?: DatasetRecord;
  message?: string;
}

export async function uploadDataset(api: ApiClient, file: File | Blob, name?: string): Promise<UploadOutcome> {
  try {
    const record = await api.uploadDataset(file, name);
    return { kind: "ok", record };
  } catch (err) {
    if (err instanceof NetworkError) {
      return { kind: "retryable", message: `network failure: ${err.message}` };
    }
    if (err instanceof ApiError) {
      // 400 carries the row-level ingest detail; 413 the size cap message.
      return { kind: "error", message: err.message };
    }
    throw err;
  }
}

export function renderSummaryCard(container: HTMLElement, record: DatasetRecord): void {
  container.textContent = "";
  const card = document.createElement("div");
  card.className = "dataset-card";
  card.dataset.datasetId = record.id;
  const title = document.createElement("h3");
  title.textContent = record.name;
  card.appendChild(title);
  const facts = document.createElement("dl");
  const entries: [string, string][] = [
    ["rows", String(record.row_count)],
    ["frequency", `${record.frequency}s`],
    ["missing", String(record.missing_count)],
    ["id", record.id],
  ];
  for (const [label, value] of entries) {
    const dt = document.createElement("dt");
    dt.textContent = label;
    const dd = document.createElement("dd");
    dd.textContent = value;
    facts.appendChild(dt);
    facts.appendChild(dd);
  }
  card.appendChild(facts);
  container.appendChild(card);
}

export function renderBanner(container: HTMLElement, outcome: UploadOutcome, onRetry?: () => void): void {
  container.textContent = "";
  if (outcome.kind === "ok") return;
  const banner = document.createElement("div");
  banner.className = outcome.kind === "retryable" ? "banner banner-retry" : "banner banner-error";
  banner.textContent = outcome.message ?? "upload failed";
  if (outcome.kind === "retryable" && onRetry) {
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.addEventListener("click", onRetry);
    banner.appendChild(button);
  }
  container.appendChild(banner);
}
