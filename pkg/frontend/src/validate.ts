/** Client-side model-spec validation: block obviously invalid forms before
 * they reach the service. The service remains the authority (422s are
 * rendered inline); this only catches the cheap mistakes. */

import type { ModelSpecDoc } from "./types.js";

export interface FieldError {
  field: string;
  message: string;
}

function intField(value: unknown, field: string, min: number, errors: FieldError[]): void {
  if (typeof value !== "number" || !Number.isInteger(value)) {
    errors.push({ field, message: `${field} must be an integer` });
  } else if (value < min) {
    errors.push({ field, message: `${field} must be >= ${min}` });
  }
}

export function validateSpec(spec: ModelSpecDoc): FieldError[] {
  const errors: FieldError[] = [];
  switch (spec.family) {
    case "arima":
    case "sarima": {
      const order = spec.order ?? [];
      if (order.length !== 3) {
        errors.push({ field: "order", message: "order must be p,d,q" });
      } else {
        (["p", "d", "q"] as const).forEach((name, i) => intField(order[i], name, 0, errors));
      }
      if (spec.family === "sarima") {
        const seasonal = spec.seasonal_order ?? [];
        if (seasonal.length !== 4) {
          errors.push({ field: "seasonal_order", message: "seasonal order must be P,D,Q,s" });
        } else {
          (["P", "D", "Q"] as const).forEach((name, i) =>
            intField(seasonal[i], name, 0, errors),
          );
          intField(seasonal[3], "s", 2, errors);
          if ((seasonal[0] ?? 0) + (seasonal[1] ?? 0) + (seasonal[2] ?? 0) === 0) {
            errors.push({ field: "seasonal_order", message: "at least one of P, D, Q must be > 0" });
          }
        }
      }
      break;
    }
    case "ets": {
      const ets = spec.ets;
      if (!ets) {
        errors.push({ field: "ets", message: "component choices are required" });
        break;
      }
      if (!["none", "additive"].includes(ets.trend)) {
        errors.push({ field: "trend", message: "trend must be none or additive" });
      }
      if (!["none", "additive", "multiplicative"].includes(ets.seasonal)) {
        errors.push({ field: "seasonal", message: "seasonal must be none, additive, or multiplicative" });
      }
      if (ets.seasonal !== "none") intField(ets.period, "period", 2, errors);
      break;
    }
    case "lstm": {
      const cfg = spec.lstm;
      if (!cfg) {
        errors.push({ field: "lstm", message: "network configuration is required" });
        break;
      }
      intField(cfg.layers, "layers", 1, errors);
      intField(cfg.hidden_units, "hidden_units", 1, errors);
      intField(cfg.window, "window", 1, errors);
      intField(cfg.epochs, "epochs", 1, errors);
      intField(cfg.batch_size, "batch_size", 1, errors);
      if (!(cfg.dropout >= 0 && cfg.dropout < 1)) {
        errors.push({ field: "dropout", message: "dropout must lie in [0, 1)" });
      }
      if (!(cfg.learning_rate > 0)) {
        errors.push({ field: "learning_rate", message: "learning_rate must be positive" });
      }
      if (!(cfg.clip_norm > 0)) {
        errors.push({ field: "clip_norm", message: "clip_norm must be positive" });
      }
      break;
    }
    default:
      errors.push({ field: "family", message: `unknown family ${String(spec.family)}` });
  }
  return errors;
}

export function specLabel(spec: ModelSpecDoc): string {
  switch (spec.family) {
    case "arima":
      return `ARIMA(${(spec.order ?? []).join(",")})`;
    case "sarima":
      return `SARIMA(${(spec.order ?? []).join(",")})(${(spec.seasonal_order ?? []).join(",")})`;
    case "ets":
      return `ETS(${spec.ets?.trend ?? "?"}/${spec.ets?.seasonal ?? "?"})`;
    case "lstm":
      return `LSTM(${spec.lstm?.layers ?? "?"}x${spec.lstm?.hidden_units ?? "?"})`;
  }
}
