/** Payload shapes of the forecasting service JSON API. */

export type Level = "utility" | "bus";

export interface BundlePayload {
  series_id: string;
  level: Level;
  origin: string;
  quantiles: number[];
  step_offset: number;
  /** one row per quantile, non-decreasing per hour */
  forecast: number[][];
  components: Record<string, number[]> | null;
  interval_method: string;
  reconciliation: string;
  /** present on GET /forecast responses */
  hours?: string[];
  actuals?: (number | null)[] | null;
}

export interface SeriesListing {
  model_tag: string;
  model_tags: string[];
  utilities: { id: string; buses: string[] }[];
  stored: Record<Level, Record<string, string[]>>;
}

export interface AttributionRow {
  timestamp: string;
  utility_residual_mw: number;
  bus_residuals_mw: Record<string, number>;
  remainder_residual_mw: number;
}

export interface AttributionPayload {
  residual_convention: string;
  top_buses: string[];
  rows: AttributionRow[];
}

export interface HighErrorProfile {
  direction: "positive" | "negative";
  denominators: Record<string, string>;
  selected_hours: string[];
  buses: Record<
    string,
    {
      bias_share: number;
      mae_share: number;
      overall_mae_share: number;
      overall_load_share: number;
    }
  >;
}

export interface HighErrorPayload {
  positive: HighErrorProfile;
  negative: HighErrorProfile;
}

export interface AdjustedViewPayload {
  utility: BundlePayload;
  buses: BundlePayload[];
  delta_mw: number[];
  applied: string[];
}

export interface AdjustmentRecordPayload {
  version: number;
  id: string;
  scope_level: Level;
  scope_ids: string[];
  kind: "load_factor" | "component_offset";
  load_factor: number | null;
  component: string | null;
  offsets: number[] | null;
  valid_from: string;
  valid_to: string;
  author: string;
  created_at: string;
}

export interface AdjustmentDraft {
  scope_level: Level;
  scope_ids: string[];
  kind: "load_factor" | "component_offset";
  valid_from: string;
  valid_to: string;
  author?: string;
  load_factor?: number | null;
  component?: string | null;
  offsets?: number[] | null;
}

export interface AdjustmentResponse {
  dry_run: boolean;
  record: AdjustmentRecordPayload;
  preview: AdjustedViewPayload | null;
}

export const COMPONENT_NAMES = [
  "trend",
  "seasonality",
  "events",
  "autoregression",
  "temperature",
] as const;
