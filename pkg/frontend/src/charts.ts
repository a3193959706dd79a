/** SVG chart builders.
 *
 * Pure payload-to-element functions. Every plotted point and bar carries
 * its exact payload number in a data-value attribute; coordinates are
 * affine projections of those numbers and no numeric content is derived
 * in the browser.
 */

import { fmtHour, fmtMw } from "./format.js";
import type { AttributionPayload, BundlePayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 860;
const HEIGHT = 300;
const PAD = { left: 58, right: 16, top: 14, bottom: 26 };

export const COMPONENT_COLORS: Record<string, string> = {
  trend: "#8c6d31",
  seasonality: "#2c7fb8",
  events: "#d94801",
  autoregression: "#756bb1",
  temperature: "#238b45",
};

const BUS_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"];

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, String(value));
  return node;
}

interface Scale {
  x(i: number): number;
  y(v: number): number;
  yMin: number;
  yMax: number;
}

function makeScale(n: number, values: number[]): Scale {
  const finite = values.filter((v) => Number.isFinite(v));
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const margin = 0.06 * (hi - lo);
  lo -= margin;
  hi += margin;
  const spanX = WIDTH - PAD.left - PAD.right;
  const spanY = HEIGHT - PAD.top - PAD.bottom;
  return {
    x: (i) => PAD.left + (n <= 1 ? spanX / 2 : (i / (n - 1)) * spanX),
    y: (v) => PAD.top + spanY - ((v - lo) / (hi - lo)) * spanY,
    yMin: lo,
    yMax: hi,
  };
}

function axes(svg: SVGSVGElement, scale: Scale, hours: string[]): void {
  const axis = el("g", { class: "axis" });
  for (const frac of [0, 0.5, 1]) {
    const v = scale.yMin + frac * (scale.yMax - scale.yMin);
    const y = scale.y(v);
    axis.appendChild(el("line", { x1: PAD.left, x2: WIDTH - PAD.right, y1: y, y2: y, class: "grid" }));
    const label = el("text", { x: 4, y: y + 4, class: "tick" });
    label.textContent = fmtMw(v);
    axis.appendChild(label);
  }
  const step = Math.max(1, Math.floor(hours.length / 8));
  for (let i = 0; i < hours.length; i += step) {
    const label = el("text", { x: scale.x(i) - 12, y: HEIGHT - 8, class: "tick" });
    label.textContent = fmtHour(hours[i]);
    axis.appendChild(label);
  }
  svg.appendChild(axis);
}

function path(points: [number, number][]): string {
  return points.map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
}

function markers(
  svg: SVGSVGElement,
  scale: Scale,
  values: (number | null)[],
  cls: string,
  series: string,
  hours: string[],
): void {
  values.forEach((v, i) => {
    if (v === null || !Number.isFinite(v)) return;
    const dot = el("circle", {
      cx: scale.x(i),
      cy: scale.y(v),
      r: 2.4,
      class: cls,
      "data-series": series,
      "data-hour": hours[i] ?? String(i),
      "data-value": v,
    });
    const tip = el("title");
    tip.textContent = `${series} ${hours[i] ?? i}: ${fmtMw(v)}`;
    dot.appendChild(tip);
    svg.appendChild(dot);
  });
}

/** Forecast view: median line, [q_lo, q_hi] band, actuals overlay. */
export function forecastChart(bundle: BundlePayload): SVGSVGElement {
  const hours = bundle.hours ?? bundle.forecast[0].map((_, i) => String(i));
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart forecast-chart",
    role: "img",
  });
  const loRow = bundle.forecast[0];
  const hiRow = bundle.forecast[bundle.forecast.length - 1];
  const medianIndex = bundle.quantiles.indexOf(0.5);
  const median = bundle.forecast[medianIndex];
  const actuals = bundle.actuals ?? [];
  const everything = [...loRow, ...hiRow, ...median, ...actuals.filter((v): v is number => v !== null)];
  const scale = makeScale(hours.length, everything);
  axes(svg, scale, hours);

  const bandPoints: [number, number][] = [
    ...hiRow.map((v, i) => [scale.x(i), scale.y(v)] as [number, number]),
    ...loRow.map((v, i) => [scale.x(loRow.length - 1 - i), scale.y(loRow[loRow.length - 1 - i])] as [number, number]),
  ];
  svg.appendChild(el("path", { d: `${path(bandPoints)} Z`, class: "band" }));
  svg.appendChild(
    el("path", { d: path(median.map((v, i) => [scale.x(i), scale.y(v)])), class: "median-line" }),
  );
  markers(svg, scale, loRow, "pt band-lo", "q_lo", hours);
  markers(svg, scale, hiRow, "pt band-hi", "q_hi", hours);
  markers(svg, scale, median, "pt median", "median", hours);
  if (bundle.actuals) {
    markers(svg, scale, bundle.actuals, "pt actual", "actual", hours);
  }
  return svg;
}

/** Decomposition panel: one trace per component; values verbatim. */
export function decompositionChart(bundle: BundlePayload, hidden: Set<string> = new Set()): SVGSVGElement {
  const hours = bundle.hours ?? [];
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart decomposition-chart",
    role: "img",
  });
  const components = bundle.components ?? {};
  const shown = Object.entries(components).filter(([name]) => !hidden.has(name));
  const values = shown.flatMap(([, vs]) => vs);
  const scale = makeScale(hours.length || (shown[0]?.[1].length ?? 0), values.length ? values : [0, 1]);
  axes(svg, scale, hours);
  for (const [name, series] of shown) {
    svg.appendChild(
      el("path", {
        d: path(series.map((v, i) => [scale.x(i), scale.y(v)])),
        class: "component-line",
        stroke: COMPONENT_COLORS[name] ?? "#555",
        "data-component": name,
      }),
    );
    series.forEach((v, i) => {
      const dot = el("circle", {
        cx: scale.x(i),
        cy: scale.y(v),
        r: 2.2,
        fill: COMPONENT_COLORS[name] ?? "#555",
        class: "pt component",
        "data-series": name,
        "data-hour": hours[i] ?? String(i),
        "data-value": v,
      });
      const tip = el("title");
      tip.textContent = `${name} ${hours[i] ?? i}: ${fmtMw(v)}`;
      dot.appendChild(tip);
      svg.appendChild(dot);
    });
  }
  return svg;
}

/** Attribution: stacked top-N bus bars + grey remainder, black utility line. */
export function attributionChart(payload: AttributionPayload): SVGSVGElement {
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart attribution-chart",
    role: "img",
  });
  const rows = payload.rows;
  const hours = rows.map((r) => r.timestamp);
  const totalsUp = rows.map((r) =>
    Object.values(r.bus_residuals_mw).filter((v) => v > 0).reduce((a, b) => a + b, 0) +
    Math.max(r.remainder_residual_mw, 0),
  );
  const totalsDown = rows.map((r) =>
    Object.values(r.bus_residuals_mw).filter((v) => v < 0).reduce((a, b) => a + b, 0) +
    Math.min(r.remainder_residual_mw, 0),
  );
  const scale = makeScale(rows.length, [
    ...totalsUp,
    ...totalsDown,
    ...rows.map((r) => r.utility_residual_mw),
    0,
  ]);
  axes(svg, scale, hours);
  const slot = (WIDTH - PAD.left - PAD.right) / Math.max(rows.length, 1);
  const barWidth = Math.max(1.5, slot * 0.7);

  rows.forEach((row, i) => {
    let up = 0;
    let down = 0;
    const xc = scale.x(i) - barWidth / 2;
    const segments: [string, number][] = [
      ...payload.top_buses.map((bus) => [bus, row.bus_residuals_mw[bus]] as [string, number]),
      ["remainder", row.remainder_residual_mw] as [string, number],
    ];
    for (const [name, value] of segments) {
      if (!Number.isFinite(value) || value === 0) continue;
      const from = value > 0 ? up : down;
      const to = from + value;
      if (value > 0) up = to;
      else down = to;
      const y0 = scale.y(Math.max(from, to));
      const height = Math.abs(scale.y(from) - scale.y(to));
      const color =
        name === "remainder" ? "#b0b0b0" : BUS_PALETTE[payload.top_buses.indexOf(name) % BUS_PALETTE.length];
      const rect = el("rect", {
        x: xc,
        y: y0,
        width: barWidth,
        height: Math.max(height, 0.4),
        fill: color,
        class: "residual-bar",
        "data-series": name,
        "data-hour": row.timestamp,
        "data-value": value,
      });
      const tip = el("title");
      tip.textContent = `${name} ${row.timestamp}: ${fmtMw(value)}`;
      rect.appendChild(tip);
      svg.appendChild(rect);
    }
  });

  svg.appendChild(
    el("path", {
      d: path(rows.map((r, i) => [scale.x(i), scale.y(r.utility_residual_mw)])),
      class: "utility-line",
    }),
  );
  markers(svg, scale, rows.map((r) => r.utility_residual_mw), "pt utility", "utility_residual", hours);
  return svg;
}

/** Raw-vs-adjusted overlay with the per-hour MW delta from the service. */
export function adjustmentPreviewChart(
  raw: number[],
  adjusted: number[],
  delta: number[],
  hours: string[],
): SVGSVGElement {
  const svg = el("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: "chart preview-chart",
    role: "img",
  });
  const scale = makeScale(hours.length, [...raw, ...adjusted]);
  axes(svg, scale, hours);
  svg.appendChild(el("path", { d: path(raw.map((v, i) => [scale.x(i), scale.y(v)])), class: "raw-line" }));
  svg.appendChild(
    el("path", { d: path(adjusted.map((v, i) => [scale.x(i), scale.y(v)])), class: "adjusted-line" }),
  );
  markers(svg, scale, raw, "pt raw", "raw", hours);
  markers(svg, scale, adjusted, "pt adjusted", "adjusted", hours);
  delta.forEach((v, i) => {
    const node = el("circle", {
      cx: scale.x(i),
      cy: scale.y(adjusted[i]),
      r: 0.1,
      class: "pt delta",
      "data-series": "delta",
      "data-hour": hours[i] ?? String(i),
      "data-value": v,
    });
    svg.appendChild(node);
  });
  return svg;
}
