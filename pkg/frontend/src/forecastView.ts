/** Builds the chart series set for the forecast view: actual data, point
 * forecast, interval band when the model provides one, and anomaly
 * markers. */

import type { ChartSeries } from "./chart.js";
import type { AnomalyEventDoc, DatasetData, ForecastDoc } from "./types.js";

export interface ForecastViewModel {
  series: ChartSeries[];
  forecastPointCount: number;
  hasIntervalBand: boolean;
  intervalsNote: string | null;
  span: { start: number; end: number };
}

export function buildForecastView(
  data: DatasetData,
  forecast: ForecastDoc | null,
  anomalies: AnomalyEventDoc[] = [],
  modelLabel = "forecast",
): ForecastViewModel {
  const series: ChartSeries[] = [];

  const actualPoints = data.timestamps
    .map((t, i) => ({ t, y: data.values[i] }))
    .filter((p): p is { t: number; y: number } => p.y !== null && p.y !== undefined);
  series.push({ role: "actual", label: data.dataset_id, points: actualPoints });

  let forecastPointCount = 0;
  let hasIntervalBand = false;
  let lastForecastEpoch = actualPoints.length
    ? actualPoints[actualPoints.length - 1]!.t
    : 0;

  if (forecast) {
    const points = forecast.steps.map((s) => ({ t: s.epoch, y: s.point }));
    forecastPointCount = points.length;
    if (points.length) lastForecastEpoch = points[points.length - 1]!.t;
    series.push({ role: "forecast", label: modelLabel, points });

    if (forecast.intervals_available) {
      const band = forecast.steps
        .filter((s) => s.lower !== null && s.upper !== null)
        .map((s) => ({ t: s.epoch, y: s.lower as number, y2: s.upper as number }));
      if (band.length) {
        hasIntervalBand = true;
        series.push({ role: "interval-band", label: `${modelLabel} interval`, points: band });
      }
    }
  }

  if (anomalies.length) {
    series.push({
      role: "anomaly-marker",
      label: "anomalies",
      points: anomalies.map((a) => ({ t: a.epoch, y: a.observed })),
    });
  }

  return {
    series,
    forecastPointCount,
    hasIntervalBand,
    intervalsNote:
      forecast && !forecast.intervals_available
        ? "prediction intervals unavailable for this model"
        : null,
    span: {
      start: actualPoints.length ? actualPoints[0]!.t : 0,
      end: lastForecastEpoch,
    },
  };
}
