/** The what-if adjustment workbench.
 *
 * A draft is validated client-side, previewed through the service's
 * dry-run mode (the same endpoint that commits, so preview == outcome),
 * rendered as a raw-vs-adjusted overlay with the per-hour MW delta, and
 * submitted on confirmation. Server rejections surface verbatim.
 */

import { ApiError, ServiceClient } from "./api.js";
import { adjustmentPreviewChart } from "./charts.js";
import { fmtMw } from "./format.js";
import type { AdjustmentDraft, AdjustmentResponse } from "./types.js";
import { COMPONENT_NAMES } from "./types.js";

export interface DraftInput {
  scopeIds: string[];
  scopeLevel: "bus" | "utility";
  kind: "load_factor" | "component_offset";
  loadFactor?: number;
  component?: string;
  offsetMw?: number;
  validFrom: string;
  validTo: string;
  author: string;
}

export function validateDraft(input: DraftInput): string[] {
  const problems: string[] = [];
  if (!input.scopeIds.length) problems.push("scope must name at least one series");
  if (!(input.validFrom < input.validTo)) problems.push("valid_from must precede valid_to");
  if (input.kind === "load_factor") {
    if (
      input.loadFactor === undefined ||
      Number.isNaN(input.loadFactor) ||
      input.loadFactor < 0 ||
      input.loadFactor > 1
    ) {
      problems.push("load factor must lie in [0, 1]");
    }
  } else {
    if (!input.component || !COMPONENT_NAMES.includes(input.component as never)) {
      problems.push(`component must be one of ${COMPONENT_NAMES.join(", ")}`);
    }
    if (input.offsetMw === undefined || Number.isNaN(input.offsetMw)) {
      problems.push("offset MW is required");
    }
  }
  return problems;
}

export function hoursBetween(fromIso: string, toIso: string): number {
  const from = Date.parse(`${fromIso}Z`);
  const to = Date.parse(`${toIso}Z`);
  return Math.round((to - from) / 3_600_000);
}

export function toDraft(input: DraftInput): AdjustmentDraft {
  const draft: AdjustmentDraft = {
    scope_level: input.scopeLevel,
    scope_ids: input.scopeIds,
    kind: input.kind,
    valid_from: input.validFrom,
    valid_to: input.validTo,
    author: input.author || "operator",
  };
  if (input.kind === "load_factor") {
    draft.load_factor = input.loadFactor;
  } else {
    draft.component = input.component;
    // a flat per-hour offset across the validity window
    draft.offsets = Array(hoursBetween(input.validFrom, input.validTo)).fill(input.offsetMw);
  }
  return draft;
}

export class Workbench {
  constructor(
    private client: ServiceClient,
    private host: HTMLElement,
    private onCommitted: () => void,
  ) {}

  private previewHost: HTMLElement | null = null;
  private messageHost: HTMLElement | null = null;
  private lastPreview: AdjustmentResponse | null = null;

  render(buses: string[], utility: string, origin: string | null): void {
    const form = document.createElement("form");
    form.className = "workbench";
    form.innerHTML = `
      <h3>Adjustment workbench</h3>
      <div class="field"><label>kind
        <select name="kind">
          <option value="load_factor">load factor</option>
          <option value="component_offset">component offset</option>
        </select></label></div>
      <div class="field"><label>buses
        <select name="scope" multiple size="4">
          ${buses.map((b) => `<option value="${b}">${b}</option>`).join("")}
        </select></label></div>
      <div class="field factor-field"><label>factor [0..1]
        <input name="factor" type="number" min="0" max="1" step="0.05" value="0.5"></label></div>
      <div class="field offset-field hidden"><label>component
        <select name="component">
          ${COMPONENT_NAMES.map((c) => `<option value="${c}">${c}</option>`).join("")}
        </select></label>
        <label>offset MW <input name="offset" type="number" step="0.1" value="-1.0"></label></div>
      <div class="field"><label>valid from <input name="from" type="text" placeholder="YYYY-MM-DDTHH:00:00"></label>
        <label>valid to <input name="to" type="text" placeholder="YYYY-MM-DDTHH:00:00"></label></div>
      <div class="field"><label>author <input name="author" type="text" value="operator"></label></div>
      <div class="actions">
        <button type="button" name="preview">Preview (dry run)</button>
        <button type="button" name="submit" disabled>Submit</button>
      </div>
      <div class="messages"></div>
      <div class="preview"></div>
    `;
    this.host.appendChild(form);
    this.previewHost = form.querySelector(".preview");
    this.messageHost = form.querySelector(".messages");

    const kindSelect = form.querySelector<HTMLSelectElement>("select[name=kind]")!;
    kindSelect.addEventListener("change", () => {
      form.querySelector(".factor-field")!.classList.toggle("hidden", kindSelect.value !== "load_factor");
      form.querySelector(".offset-field")!.classList.toggle("hidden", kindSelect.value === "load_factor");
    });

    const submitButton = form.querySelector<HTMLButtonElement>("button[name=submit]")!;
    form.querySelector<HTMLButtonElement>("button[name=preview]")!.addEventListener("click", async () => {
      const result = await this.run(form, utility, origin, true);
      submitButton.disabled = result === null;
    });
    submitButton.addEventListener("click", async () => {
      const result = await this.run(form, utility, origin, false);
      if (result !== null) {
        this.say(`committed adjustment ${result.record.id}`, "ok");
        submitButton.disabled = true;
        this.onCommitted();
      }
    });
  }

  private readDraft(form: HTMLFormElement): DraftInput {
    const scopeSelect = form.querySelector<HTMLSelectElement>("select[name=scope]")!;
    const scope = Array.from(scopeSelect.options)
      .filter((o) => o.selected)
      .map((o) => o.value);
    const value = (name: string) => form.querySelector<HTMLInputElement>(`[name=${name}]`)!.value;
    return {
      scopeIds: scope,
      scopeLevel: "bus",
      kind: form.querySelector<HTMLSelectElement>("select[name=kind]")!.value as DraftInput["kind"],
      loadFactor: Number(value("factor")),
      component: form.querySelector<HTMLSelectElement>("select[name=component]")!.value,
      offsetMw: Number(value("offset")),
      validFrom: value("from"),
      validTo: value("to"),
      author: value("author"),
    };
  }

  private say(text: string, kind: "ok" | "error"): void {
    if (!this.messageHost) return;
    this.messageHost.textContent = text;
    this.messageHost.className = `messages ${kind}`;
  }

  private async run(
    form: HTMLFormElement,
    utility: string,
    origin: string | null,
    dryRun: boolean,
  ): Promise<AdjustmentResponse | null> {
    const input = this.readDraft(form);
    const problems = validateDraft(input);
    if (problems.length) {
      this.say(problems.join("; "), "error");
      return null;
    }
    try {
      const response = await this.client.submitAdjustment(toDraft(input), {
        dryRun,
        origin: origin ?? undefined,
      });
      this.lastPreview = response;
      if (response.preview && this.previewHost && origin) {
        await this.renderPreview(response, utility, origin);
      }
      if (dryRun) this.say("dry-run preview ready; submit to commit", "ok");
      return response;
    } catch (err) {
      // the server's rejection reason verbatim (e.g. overlapping factors)
      this.say(err instanceof ApiError ? err.message : String(err), "error");
      return null;
    }
  }

  /** Overlay the service's raw bundle against the previewed adjusted one;
   * both series and the per-hour delta come from payloads verbatim. */
  private async renderPreview(
    response: AdjustmentResponse,
    utility: string,
    origin: string,
  ): Promise<void> {
    if (!this.previewHost || !response.preview) return;
    while (this.previewHost.firstChild) this.previewHost.removeChild(this.previewHost.firstChild);
    const preview = response.preview;
    const rawBundle = await this.client.forecast("utility", utility, origin);
    const medianIdx = preview.utility.quantiles.indexOf(0.5);
    const adjusted = preview.utility.forecast[medianIdx];
    const raw = rawBundle.forecast[rawBundle.quantiles.indexOf(0.5)];
    const hours = rawBundle.hours ?? adjusted.map((_, i) => `h+${i + 1}`);
    const caption = document.createElement("p");
    const worst = preview.delta_mw.reduce(
      (a, b) => (Math.abs(b) > Math.abs(a) ? b : a),
      0,
    );
    caption.textContent = `raw vs adjusted utility forecast; largest hourly delta ${fmtMw(worst)}`;
    this.previewHost.appendChild(caption);
    this.previewHost.appendChild(adjustmentPreviewChart(raw, adjusted, preview.delta_mw, hours));
  }
}
