/** Leaderboard fidelity: every number shown equals the service JSON value
 * exactly — no client-side rounding or recomputation. */

import { describe, expect, it } from "vitest";

import { renderLeaderboard, toCellRows } from "../src/leaderboard.js";
import type { LeaderboardRow } from "../src/types.js";

// Awkward floats on purpose: exact fidelity must survive them.
const MOCK_SERVICE_RESPONSE: { leaderboard: LeaderboardRow[] } = {
  leaderboard: [
    {
      model_id: "SARIMA(1,1,1)(1,1,1)_12",
      spec_digest: "a1b2c3d4e5f60718",
      folds: [],
      aggregate: {
        mae: 9.870000000000001,
        mse: 140.56,
        rmse: 11.855800941498841,
        mape: 2.7500000000000004,
        n: 36,
        mape_excluded: 0,
      },
      fit_seconds: 1.25,
      error: null,
    },
    {
      model_id: "ARIMA(1, 1, 1)",
      spec_digest: "0f1e2d3c4b5a6978",
      folds: [],
      aggregate: {
        mae: 12.34,
        mse: 200.45,
        rmse: 14.158036586471624,
        mape: 3.45,
        n: 36,
        mape_excluded: 0,
      },
      fit_seconds: 0.75,
      error: null,
    },
    {
      model_id: "LSTM(1x16)",
      spec_digest: "9988776655443322",
      folds: [],
      aggregate: null,
      fit_seconds: 0,
      error: "DataError: series too short for window 48",
    },
  ],
};

describe("leaderboard fidelity", () => {
  it("renders every metric exactly as the service sent it", () => {
    const host = document.createElement("div");
    document.body.appendChild(host);
    renderLeaderboard(host, MOCK_SERVICE_RESPONSE.leaderboard, () => undefined);

    const rows = Array.from(host.querySelectorAll("tbody tr"));
    expect(rows).toHaveLength(3);
    for (const [i, row] of MOCK_SERVICE_RESPONSE.leaderboard.entries()) {
      const cells = Array.from(rows[i]!.querySelectorAll("td")).map((c) => c.textContent);
      expect(cells[0]).toBe(row.model_id);
      if (row.aggregate) {
        expect(cells[1]).toBe(String(row.aggregate.mae));
        expect(cells[2]).toBe(String(row.aggregate.mse));
        expect(cells[3]).toBe(String(row.aggregate.rmse));
        expect(cells[4]).toBe(String(row.aggregate.mape));
        // parsing the displayed text back gives the identical number
        expect(Number(cells[1])).toBe(row.aggregate.mae);
        expect(Number(cells[4])).toBe(row.aggregate.mape);
      } else {
        expect(cells[1]).toBe("-");
      }
    }
  });

  it("matches the rendered-table snapshot for the mocked service response", () => {
    const host = document.createElement("div");
    renderLeaderboard(host, MOCK_SERVICE_RESPONSE.leaderboard, () => undefined);
    const text = Array.from(host.querySelectorAll("tr")).map((tr) =>
      Array.from(tr.querySelectorAll("th,td")).map((c) => c.textContent).join(" | "),
    );
    expect(text).toMatchInlineSnapshot(`
      [
        "Model | MAE | MSE | RMSE | MAPE | ",
        "SARIMA(1,1,1)(1,1,1)_12 | 9.870000000000001 | 140.56 | 11.85580094149884 | 2.7500000000000004 | Promote",
        "ARIMA(1, 1, 1) | 12.34 | 200.45 | 14.158036586471624 | 3.45 | Promote",
        "LSTM(1x16) | - | - | - | - | DataError: series too short for window 48",
      ]
    `);
  });

  it("cell rows keep null MAPE as n/a and flag failures", () => {
    const cells = toCellRows(MOCK_SERVICE_RESPONSE.leaderboard);
    expect(cells[2]!.failed).toBe(true);
    const withNullMape = toCellRows([
      {
        ...MOCK_SERVICE_RESPONSE.leaderboard[0]!,
        aggregate: { ...MOCK_SERVICE_RESPONSE.leaderboard[0]!.aggregate!, mape: null },
      },
    ]);
    expect(withNullMape[0]!.mape).toBe("n/a");
  });

  it("shows an aggregated failure panel when every fit failed", () => {
    const host = document.createElement("div");
    const allFailed = MOCK_SERVICE_RESPONSE.leaderboard.map((row) => ({
      ...row,
      aggregate: null,
      error: "FitFailureError: no finite objective",
    }));
    renderLeaderboard(host, allFailed, () => undefined);
    expect(host.querySelector("table")).toBeNull();
    expect(host.querySelector(".failure-panel")).not.toBeNull();
    expect(host.querySelectorAll(".failure-panel li")).toHaveLength(3);
  });
});
