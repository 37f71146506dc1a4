/** Leaderboard rendering. Every displayed number is the exact value from
 * the service response (String() of the JSON number) — the client never
 * recomputes metrics. */

import type { LeaderboardRow } from "./types.js";

export interface LeaderboardCellRow {
  modelId: string;
  specDigest: string;
  mae: string;
  mse: string;
  rmse: string;
  mape: string;
  failed: boolean;
  error: string | null;
}

export function toCellRows(rows: LeaderboardRow[]): LeaderboardCellRow[] {
  return rows.map((row) => {
    if (row.error !== null || row.aggregate === null) {
      return {
        modelId: row.model_id,
        specDigest: row.spec_digest,
        mae: "-",
        mse: "-",
        rmse: "-",
        mape: "-",
        failed: true,
        error: row.error,
      };
    }
    const agg = row.aggregate;
    return {
      modelId: row.model_id,
      specDigest: row.spec_digest,
      mae: String(agg.mae),
      mse: String(agg.mse),
      rmse: String(agg.rmse),
      mape: agg.mape === null ? "n/a" : String(agg.mape),
      failed: false,
      error: null,
    };
  });
}

export const LEADERBOARD_COLUMNS = ["Model", "MAE", "MSE", "RMSE", "MAPE", ""] as const;

/** Render the table; returns the promote buttons keyed by spec digest. */
export function renderLeaderboard(
  container: HTMLElement,
  rows: LeaderboardRow[],
  onPromote: (row: LeaderboardRow) => void,
): void {
  container.textContent = "";
  const failures = rows.filter((r) => r.error !== null);
  if (failures.length === rows.length && rows.length > 0) {
    const panel = document.createElement("div");
    panel.className = "failure-panel";
    const heading = document.createElement("p");
    heading.textContent = "All model fits failed:";
    panel.appendChild(heading);
    const list = document.createElement("ul");
    for (const row of failures) {
      const item = document.createElement("li");
      item.textContent = `${row.model_id}: ${row.error}`;
      list.appendChild(item);
    }
    panel.appendChild(list);
    container.appendChild(panel);
    return;
  }

  const table = document.createElement("table");
  table.className = "leaderboard";
  const thead = document.createElement("thead");
  const head = document.createElement("tr");
  for (const column of LEADERBOARD_COLUMNS) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  thead.appendChild(head);
  table.appendChild(thead);
  const body = document.createElement("tbody");
  table.appendChild(body);
  for (const [rank, row] of rows.entries()) {
    const tr = document.createElement("tr");
    tr.dataset.digest = row.spec_digest;
    tr.dataset.rank = String(rank);
    const cells = toCellRows([row])[0]!;
    for (const text of [cells.modelId, cells.mae, cells.mse, cells.rmse, cells.mape]) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    const actionCell = document.createElement("td");
    if (!cells.failed) {
      const button = document.createElement("button");
      button.textContent = "Promote";
      button.addEventListener("click", () => onPromote(row));
      actionCell.appendChild(button);
    } else {
      actionCell.textContent = cells.error ?? "failed";
      tr.classList.add("failed");
    }
    tr.appendChild(actionCell);
    body.appendChild(tr);
  }
  container.appendChild(table);
}
