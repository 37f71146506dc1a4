/** Family-specific form readers: turn the model-lab inputs into a spec
 * document. Validation happens in validate.ts; this only collects values. */

import type { ModelFamily, ModelSpecDoc } from "./types.js";

function num(root: ParentNode, id: string, fallback: number): number {
  const el = root.querySelector<HTMLInputElement>(`#${id}`);
  if (!el || el.value.trim() === "") return fallback;
  return Number(el.value);
}

function text(root: ParentNode, id: string, fallback: string): string {
  const el = root.querySelector<HTMLInputElement | HTMLSelectElement>(`#${id}`);
  return el && el.value ? el.value : fallback;
}

export function readSpecForm(root: ParentNode): ModelSpecDoc {
  const family = text(root, "spec-family", "arima") as ModelFamily;
  switch (family) {
    case "arima":
      return {
        family,
        order: [num(root, "arima-p", 0), num(root, "arima-d", 0), num(root, "arima-q", 0)],
      };
    case "sarima":
      return {
        family,
        order: [num(root, "arima-p", 0), num(root, "arima-d", 0), num(root, "arima-q", 0)],
        seasonal_order: [
          num(root, "sarima-P", 0),
          num(root, "sarima-D", 0),
          num(root, "sarima-Q", 0),
          num(root, "sarima-s", 12),
        ],
      };
    case "ets":
      return {
        family,
        ets: {
          trend: text(root, "ets-trend", "none"),
          seasonal: text(root, "ets-seasonal", "none"),
          period: num(root, "ets-period", 0),
        },
      };
    case "lstm":
      return {
        family,
        lstm: {
          layers: num(root, "lstm-layers", 1),
          hidden_units: num(root, "lstm-hidden", 16),
          window: num(root, "lstm-window", 10),
          dropout: num(root, "lstm-dropout", 0),
          learning_rate: num(root, "lstm-lr", 0.01),
          epochs: num(root, "lstm-epochs", 100),
          batch_size: num(root, "lstm-batch", 32),
          seed: num(root, "lstm-seed", 0),
          clip_norm: num(root, "lstm-clip", 5),
        },
      };
  }
}
