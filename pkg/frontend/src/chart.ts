/** Generic SVG charting layer: line series, interval bands, and point
 * markers over a shared time axis. No charting library involved. */

export type SeriesRole = "actual" | "forecast" | "interval-band" | "anomaly-marker";

export interface ChartPoint {
  t: number; // epoch seconds
  y: number;
  y2?: number; // upper bound for interval bands (y is the lower bound)
}

export interface ChartSeries {
  role: SeriesRole;
  label: string;
  points: ChartPoint[];
}

export interface ChartOptions {
  width: number;
  height: number;
  padding: number;
  viewport?: { start: number; end: number } | null;
}

export interface LinearScale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as LinearScale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function visiblePoints(series: ChartSeries, viewport: { start: number; end: number } | null | undefined): ChartPoint[] {
  if (!viewport) return series.points;
  return series.points.filter((p) => p.t >= viewport.start && p.t <= viewport.end);
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return lo === hi ? [lo - 1, hi + 1] : [lo, hi];
}

export function chartScales(seriesList: ChartSeries[], options: ChartOptions): {
  x: LinearScale;
  y: LinearScale;
} {
  const ts: number[] = [];
  const ys: number[] = [];
  for (const series of seriesList) {
    for (const point of visiblePoints(series, options.viewport)) {
      ts.push(point.t);
      ys.push(point.y);
      if (point.y2 !== undefined) ys.push(point.y2);
    }
  }
  const pad = options.padding;
  return {
    x: linearScale(extent(ts), [pad, options.width - pad]),
    y: linearScale(extent(ys), [options.height - pad, pad]),
  };
}

export function linePath(points: ChartPoint[], x: LinearScale, y: LinearScale): string {
  return points
    .map((p, i) => `${i === 0 ? "M" : "L"}${x(p.t).toFixed(2)},${y(p.y).toFixed(2)}`)
    .join("");
}

export function bandPath(points: ChartPoint[], x: LinearScale, y: LinearScale): string {
  if (points.length === 0) return "";
  const lower = points.map((p) => `${x(p.t).toFixed(2)},${y(p.y).toFixed(2)}`);
  const upper = [...points]
    .reverse()
    .map((p) => `${x(p.t).toFixed(2)},${y(p.y2 ?? p.y).toFixed(2)}`);
  return `M${lower.join("L")}L${upper.join("L")}Z`;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const ROLE_CLASS: Record<SeriesRole, string> = {
  actual: "series-actual",
  forecast: "series-forecast",
  "interval-band": "series-band",
  "anomaly-marker": "series-anomaly",
};

/** Build the full chart SVG. Series are drawn bands first so lines stay
 * visible; anomaly markers come last. */
export function renderChart(seriesList: ChartSeries[], options: ChartOptions): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(options.width));
  svg.setAttribute("height", String(options.height));
  svg.setAttribute("viewBox", `0 0 ${options.width} ${options.height}`);
  const { x, y } = chartScales(seriesList, options);
  const order: SeriesRole[] = ["interval-band", "actual", "forecast", "anomaly-marker"];
  for (const role of order) {
    for (const series of seriesList.filter((s) => s.role === role)) {
      const points = visiblePoints(series, options.viewport);
      if (points.length === 0) continue;
      if (role === "anomaly-marker") {
        const group = document.createElementNS(SVG_NS, "g");
        group.setAttribute("class", ROLE_CLASS[role]);
        group.setAttribute("data-label", series.label);
        for (const point of points) {
          const circle = document.createElementNS(SVG_NS, "circle");
          circle.setAttribute("cx", x(point.t).toFixed(2));
          circle.setAttribute("cy", y(point.y).toFixed(2));
          circle.setAttribute("r", "4");
          group.appendChild(circle);
        }
        svg.appendChild(group);
      } else {
        const path = document.createElementNS(SVG_NS, "path");
        path.setAttribute("class", ROLE_CLASS[role]);
        path.setAttribute("data-label", series.label);
        path.setAttribute(
          "d",
          role === "interval-band" ? bandPath(points, x, y) : linePath(points, x, y),
        );
        if (role !== "interval-band") path.setAttribute("fill", "none");
        svg.appendChild(path);
      }
    }
  }
  return svg;
}

/** Zoom the viewport by a factor around a focus time; factor < 1 zooms in. */
export function zoomViewport(
  view: { start: number; end: number },
  factor: number,
  focus: number,
): { start: number; end: number } {
  const start = focus - (focus - view.start) * factor;
  const end = focus + (view.end - focus) * factor;
  return start < end ? { start, end } : view;
}

/** Shift the viewport by a fraction of its width (negative pans left). */
export function panViewport(
  view: { start: number; end: number },
  fraction: number,
): { start: number; end: number } {
  const width = view.end - view.start;
  return { start: view.start + width * fraction, end: view.end + width * fraction };
}
