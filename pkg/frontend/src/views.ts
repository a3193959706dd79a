/** Panel assembly: fetch payloads, render charts and tables, surface
 * errors as banners or empty states. */

import { ApiError, ServiceClient } from "./api.js";
import {
  adjustmentPreviewChart,
  attributionChart,
  COMPONENT_COLORS,
  decompositionChart,
  forecastChart,
} from "./charts.js";
import { fmtMw, fmtShare } from "./format.js";
import type { ViewState } from "./state.js";
import type { BundlePayload, HighErrorPayload } from "./types.js";
import { COMPONENT_NAMES } from "./types.js";

export function banner(kind: "error" | "empty" | "retry", text: string): HTMLElement {
  const node = document.createElement("div");
  node.className = `banner banner-${kind}`;
  node.textContent = text;
  return node;
}

function clear(host: HTMLElement): void {
  while (host.firstChild) host.removeChild(host.firstChild);
}

export async function renderForecastView(
  client: ServiceClient,
  host: HTMLElement,
  state: ViewState,
): Promise<void> {
  clear(host);
  if (!state.utility || !state.origin) {
    host.appendChild(banner("empty", "Pick a utility and a forecast origin."));
    return;
  }
  let bundle: BundlePayload;
  try {
    bundle = await client.forecast("utility", state.utility, state.origin);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      host.appendChild(banner("empty", `No forecast stored at ${state.origin}.`));
    } else {
      host.appendChild(banner("retry", `Service unavailable (${String(err)}); retry shortly.`));
    }
    return;
  }
  const title = document.createElement("h3");
  const hasActuals = (bundle.actuals ?? []).some((v) => v !== null);
  title.textContent = `Utility ${bundle.series_id} - median and ${
    intervalLabel(bundle.quantiles)
  } band${hasActuals ? " with actuals" : " (forecast only)"}`;
  host.appendChild(title);
  host.appendChild(forecastChart(bundle));
  if (state.view === "adjusted") {
    await renderAdjustedOverlay(client, host, state, bundle);
  }
}

/** Raw-vs-adjusted comparison; shown only when the journal applied
 * at least one adjustment to this origin. */
async function renderAdjustedOverlay(
  client: ServiceClient,
  host: HTMLElement,
  state: ViewState,
  rawBundle: BundlePayload,
): Promise<void> {
  try {
    const view = await client.adjusted(state.utility!, state.origin!);
    if (!view.applied.length) {
      host.appendChild(banner("empty", "No active adjustments; showing the raw view."));
      return;
    }
    const medianIdx = view.utility.quantiles.indexOf(0.5);
    const adjusted = view.utility.forecast[medianIdx];
    const raw = rawBundle.forecast[rawBundle.quantiles.indexOf(0.5)];
    const hours = rawBundle.hours ?? adjusted.map((_, i) => `h+${i + 1}`);
    const title = document.createElement("h3");
    title.textContent = `Adjusted vs raw (${view.applied.length} adjustment${
      view.applied.length === 1 ? "" : "s"
    } applied)`;
    host.appendChild(title);
    host.appendChild(adjustmentPreviewChart(raw, adjusted, view.delta_mw, hours));
  } catch (err) {
    host.appendChild(banner("retry", `Adjusted view unavailable (${String(err)}).`));
  }
}

function intervalLabel(quantiles: number[]): string {
  const lo = quantiles[0];
  const hi = quantiles[quantiles.length - 1];
  return `${Math.round((hi - lo) * 100)}%`;
}

export async function renderDecomposition(
  client: ServiceClient,
  host: HTMLElement,
  state: ViewState,
  hidden: Set<string>,
  onToggle: (component: string) => void,
): Promise<void> {
  clear(host);
  if (!state.utility || !state.origin) return;
  const targets: { level: "utility" | "bus"; id: string }[] = [
    { level: "utility", id: state.utility },
    ...state.buses.map((id) => ({ level: "bus" as const, id })),
  ];
  for (const target of targets) {
    const section = document.createElement("section");
    section.className = "decomposition-panel";
    const title = document.createElement("h3");
    title.textContent = `${target.level} ${target.id} - component decomposition`;
    section.appendChild(title);
    try {
      const bundle = await client.components(target.level, target.id, state.origin);
      section.appendChild(componentToggles(hidden, onToggle));
      section.appendChild(decompositionChart(bundle, hidden));
      section.appendChild(componentTable(bundle));
    } catch (err) {
      section.appendChild(
        err instanceof ApiError && err.status === 404
          ? banner("empty", `No decomposition stored for ${target.id}.`)
          : banner("retry", `Service unavailable (${String(err)}).`),
      );
    }
    host.appendChild(section);
  }
}

function componentToggles(hidden: Set<string>, onToggle: (c: string) => void): HTMLElement {
  const row = document.createElement("div");
  row.className = "toggles";
  for (const name of COMPONENT_NAMES) {
    const label = document.createElement("label");
    label.style.color = COMPONENT_COLORS[name] ?? "#333";
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = !hidden.has(name);
    box.dataset.component = name;
    box.addEventListener("change", () => onToggle(name));
    label.appendChild(box);
    label.appendChild(document.createTextNode(name));
    row.appendChild(label);
  }
  return row;
}

/** Per-hour MW table; cells carry the exact payload values. */
export function componentTable(bundle: BundlePayload): HTMLElement {
  const table = document.createElement("table");
  table.className = "component-table";
  const head = table.insertRow();
  head.insertCell().textContent = "hour";
  for (const name of COMPONENT_NAMES) head.insertCell().textContent = name;
  head.insertCell().textContent = "median forecast";
  const hours = bundle.hours ?? [];
  const median = bundle.forecast[bundle.quantiles.indexOf(0.5)];
  hours.forEach((hour, i) => {
    const row = table.insertRow();
    row.insertCell().textContent = hour;
    for (const name of COMPONENT_NAMES) {
      const value = bundle.components?.[name]?.[i];
      const cell = row.insertCell();
      if (value !== undefined) {
        cell.dataset.series = name;
        cell.dataset.hour = hour;
        cell.dataset.value = String(value);
        cell.textContent = fmtMw(value);
      }
    }
    const cell = row.insertCell();
    cell.dataset.series = "median";
    cell.dataset.hour = hour;
    cell.dataset.value = String(median[i]);
    cell.textContent = fmtMw(median[i]);
  });
  return table;
}

export async function renderAttribution(
  client: ServiceClient,
  host: HTMLElement,
  state: ViewState,
  range: { from: string; to: string },
): Promise<void> {
  clear(host);
  if (!state.utility) return;
  const title = document.createElement("h3");
  title.textContent = `Bus residual attribution (top ${state.topN}, actual - forecast)`;
  host.appendChild(title);
  try {
    const payload = await client.attribution(state.utility, range.from, range.to, state.topN);
    host.appendChild(attributionChart(payload));
    const legend = document.createElement("p");
    legend.className = "legend";
    legend.textContent = `Colored bars: ${payload.top_buses.join(", ")}; grey: remainder; black line: utility residual.`;
    host.appendChild(legend);
  } catch (err) {
    host.appendChild(
      err instanceof ApiError && err.status === 409
        ? banner("empty", `Attribution disabled: ${err.message}`)
        : banner("retry", `Attribution unavailable (${String(err)}).`),
    );
  }
}

export async function renderHighError(
  client: ServiceClient,
  host: HTMLElement,
  state: ViewState,
  range: { from: string; to: string },
): Promise<void> {
  clear(host);
  if (!state.utility) return;
  let payload: HighErrorPayload;
  try {
    payload = await client.highError(state.utility, range.from, range.to);
  } catch (err) {
    host.appendChild(banner("empty", `High-error profiles unavailable (${String(err)}).`));
    return;
  }
  for (const profile of [payload.positive, payload.negative]) {
    const section = document.createElement("section");
    const title = document.createElement("h3");
    title.textContent = `High-error situations - ${profile.direction} decile (${profile.selected_hours.length} hours)`;
    section.appendChild(title);
    const table = document.createElement("table");
    table.className = "high-error-table";
    const head = table.insertRow();
    for (const label of ["bus", "bias share", "MAE share", "overall MAE share", "overall load share"]) {
      head.insertCell().textContent = label;
    }
    const entries = Object.entries(profile.buses).sort((a, b) => b[1].mae_share - a[1].mae_share);
    for (const [bus, shares] of entries) {
      const row = table.insertRow();
      row.insertCell().textContent = bus;
      for (const key of ["bias_share", "mae_share", "overall_mae_share", "overall_load_share"] as const) {
        const cell = row.insertCell();
        cell.dataset.series = `${profile.direction}:${bus}:${key}`;
        cell.dataset.value = String(shares[key]);
        cell.textContent = fmtShare(shares[key]);
      }
    }
    section.appendChild(table);
    host.appendChild(section);
  }
}
