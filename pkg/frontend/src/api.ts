/** Typed client for the forecasting service.
 *
 * The dashboard performs no numerical computation: every number on screen
 * comes out of these payloads untouched.
 */

import type {
  AdjustedViewPayload,
  AdjustmentDraft,
  AdjustmentRecordPayload,
  AdjustmentResponse,
  AttributionPayload,
  BundlePayload,
  HighErrorPayload,
  Level,
  SeriesListing,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ServiceClient {
  constructor(private base: string = "") {}

  health(): Promise<{ status: string }> {
    return request(`${this.base}/v1/health`);
  }

  series(): Promise<SeriesListing> {
    return request(`${this.base}/v1/series`);
  }

  forecast(level: Level, id: string, origin: string): Promise<BundlePayload> {
    const q = new URLSearchParams({ origin });
    return request(`${this.base}/v1/forecast/${level}/${encodeURIComponent(id)}?${q}`);
  }

  components(level: Level, id: string, origin: string): Promise<BundlePayload> {
    const q = new URLSearchParams({ origin });
    return request(
      `${this.base}/v1/forecast/${level}/${encodeURIComponent(id)}/components?${q}`,
    );
  }

  adjusted(utility: string, origin: string): Promise<AdjustedViewPayload> {
    const q = new URLSearchParams({ origin });
    return request(
      `${this.base}/v1/forecast/utility/${encodeURIComponent(utility)}/adjusted?${q}`,
    );
  }

  attribution(
    utility: string,
    from: string,
    to: string,
    topN: number,
  ): Promise<AttributionPayload> {
    const q = new URLSearchParams({ utility, from, to, top_n: String(topN) });
    return request(`${this.base}/v1/diagnostics/attribution?${q}`);
  }

  highError(utility: string, from: string, to: string): Promise<HighErrorPayload> {
    const q = new URLSearchParams({ utility, from, to });
    return request(`${this.base}/v1/diagnostics/high-error?${q}`);
  }

  adjustments(activeAt?: string): Promise<{ adjustments: AdjustmentRecordPayload[] }> {
    const q = activeAt ? `?${new URLSearchParams({ active_at: activeAt })}` : "";
    return request(`${this.base}/v1/adjustments${q}`);
  }

  /** Dry-run and commit share this endpoint, so previews equal outcomes. */
  submitAdjustment(
    draft: AdjustmentDraft,
    opts: { dryRun: boolean; origin?: string },
  ): Promise<AdjustmentResponse> {
    const params = new URLSearchParams();
    if (opts.dryRun) params.set("dry_run", "true");
    if (opts.origin) params.set("origin", opts.origin);
    const suffix = params.size ? `?${params}` : "";
    return request(`${this.base}/v1/adjustments${suffix}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(draft),
    });
  }
}
