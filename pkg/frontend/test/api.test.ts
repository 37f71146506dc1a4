/** Typed client: error mapping, upload form shape, polling backoff. */

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, NetworkError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), { status });
}

describe("ApiClient", () => {
  it("maps service error bodies onto ApiError", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse({ api_version: "1", error: { code: "ingest_error", message: "row 7: bad" } }, 400),
    );
    const err = await api.listDatasets().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("ingest_error");
    expect(err.message).toBe("row 7: bad");
  });

  it("wraps transport failures in NetworkError", async () => {
    const api = new ApiClient("", async () => {
      throw new TypeError("connection refused");
    });
    const err = await api.listDatasets().catch((e) => e);
    expect(err).toBeInstanceOf(NetworkError);
  });

  it("uploads under the multipart field name the service expects", async () => {
    let seenField: string | null = null;
    const api = new ApiClient("", async (_url, init) => {
      const form = init?.body as FormData;
      seenField = form.has("file") ? "file" : null;
      return jsonResponse({ dataset: { id: "d1" } }, 201);
    });
    await api.uploadDataset(new Blob(["timestamp,value\n"]), "x.csv");
    expect(seenField).toBe("file");
  });

  it("polls with backoff from 1s capped at 5s", async () => {
    const sleeps: number[] = [];
    let calls = 0;
    const api = new ApiClient(
      "",
      async () => {
        calls += 1;
        const status = calls >= 7 ? "done" : "running";
        return jsonResponse({ job: { id: "j", status } });
      },
      async (ms) => {
        sleeps.push(ms);
      },
    );
    const job = await api.pollJob("j");
    expect(job.status).toBe("done");
    expect(sleeps).toEqual([1000, 1500, 2250, 3375, 5000, 5000]);
  });

  it("carries aggregated causes on comparison failures", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse(
        {
          api_version: "1",
          error: {
            code: "comparison_error",
            message: "every model failed",
            causes: { "ARIMA(9, 2, 9)": "DataError: too short" },
          },
        },
        500,
      ),
    );
    const err = await api.compare("d", [], { folds: 2, horizon: 4 }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.causes["ARIMA(9, 2, 9)"]).toContain("too short");
  });
});
