/** View state encoded in the URL query string, so any state reached by
 * clicking is reproducible from a shareable link. */

export interface ViewState {
  utility: string | null;
  origin: string | null;
  /** drill-down bus set shown in the decomposition panel */
  buses: string[];
  /** raw vs adjusted comparison toggle */
  view: "raw" | "adjusted";
  topN: number;
}

export const DEFAULT_STATE: ViewState = {
  utility: null,
  origin: null,
  buses: [],
  view: "raw",
  topN: 5,
};

export function stateFromQuery(query: string): ViewState {
  const params = new URLSearchParams(query);
  const buses = params.get("buses");
  const topN = Number(params.get("top_n") ?? DEFAULT_STATE.topN);
  return {
    utility: params.get("utility"),
    origin: params.get("origin"),
    buses: buses ? buses.split(",").filter((b) => b.length > 0) : [],
    view: params.get("view") === "adjusted" ? "adjusted" : "raw",
    topN: Number.isFinite(topN) && topN > 0 ? Math.floor(topN) : DEFAULT_STATE.topN,
  };
}

export function queryFromState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.utility) params.set("utility", state.utility);
  if (state.origin) params.set("origin", state.origin);
  if (state.buses.length) params.set("buses", state.buses.join(","));
  if (state.view !== "raw") params.set("view", state.view);
  if (state.topN !== DEFAULT_STATE.topN) params.set("top_n", String(state.topN));
  return params.toString();
}

export function pushState(state: ViewState): void {
  const query = queryFromState(state);
  const url = query ? `?${query}` : window.location.pathname;
  window.history.replaceState(null, "", url);
}
