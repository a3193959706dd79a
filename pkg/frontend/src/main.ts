/** Dashboard bootstrap: controls wiring, URL state, panel refresh. */

import { ServiceClient } from "./api.js";
import { pushState, stateFromQuery, ViewState } from "./state.js";
import {
  banner,
  renderAttribution,
  renderDecomposition,
  renderForecastView,
  renderHighError,
} from "./views.js";
import { Workbench } from "./workbench.js";
import type { SeriesListing } from "./types.js";

const client = new ServiceClient("");

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

class App {
  state: ViewState = stateFromQuery(window.location.search);
  hiddenComponents = new Set<string>();
  listing: SeriesListing | null = null;

  async start(): Promise<void> {
    try {
      this.listing = await client.series();
    } catch (err) {
      byId("forecast-panel").appendChild(
        banner("retry", `Service unavailable (${String(err)}); reload to retry.`),
      );
      return;
    }
    this.fillControls();
    this.bindControls();
    await this.refresh();
  }

  utilityOrigins(): string[] {
    if (!this.state.utility || !this.listing) return [];
    return this.listing.stored.utility[this.state.utility] ?? [];
  }

  fillControls(): void {
    const listing = this.listing!;
    const utilitySelect = byId("utility-select") as HTMLSelectElement;
    utilitySelect.innerHTML = listing.utilities
      .map((u) => `<option value="${u.id}">${u.id}</option>`)
      .join("");
    if (!this.state.utility && listing.utilities.length) {
      this.state.utility = listing.utilities[0].id;
    }
    if (this.state.utility) utilitySelect.value = this.state.utility;

    const originSelect = byId("origin-select") as HTMLSelectElement;
    const origins = this.utilityOrigins();
    originSelect.innerHTML = origins.map((o) => `<option value="${o}">${o}</option>`).join("");
    if (!this.state.origin && origins.length) this.state.origin = origins[origins.length - 1];
    if (this.state.origin) originSelect.value = this.state.origin;

    const busSelect = byId("bus-select") as HTMLSelectElement;
    const buses = listing.utilities.find((u) => u.id === this.state.utility)?.buses ?? [];
    busSelect.innerHTML = buses.map((b) => `<option value="${b}">${b}</option>`).join("");
    for (const option of Array.from(busSelect.options)) {
      option.selected = this.state.buses.includes(option.value);
    }
    (byId("view-select") as HTMLSelectElement).value = this.state.view;
    (byId("topn-input") as HTMLInputElement).value = String(this.state.topN);
  }

  bindControls(): void {
    byId("utility-select").addEventListener("change", (e) => {
      this.state.utility = (e.target as HTMLSelectElement).value;
      this.state.origin = null;
      this.state.buses = [];
      this.fillControls();
      void this.refresh();
    });
    byId("origin-select").addEventListener("change", (e) => {
      this.state.origin = (e.target as HTMLSelectElement).value;
      void this.refresh();
    });
    byId("bus-select").addEventListener("change", (e) => {
      const select = e.target as HTMLSelectElement;
      this.state.buses = Array.from(select.selectedOptions).map((o) => o.value);
      void this.refresh();
    });
    byId("view-select").addEventListener("change", (e) => {
      this.state.view = (e.target as HTMLSelectElement).value === "adjusted" ? "adjusted" : "raw";
      void this.refresh();
    });
    byId("topn-input").addEventListener("change", (e) => {
      this.state.topN = Math.max(1, Number((e.target as HTMLInputElement).value) || 5);
      void this.refresh();
    });
  }

  async refresh(): Promise<void> {
    pushState(this.state);
    const origins = this.utilityOrigins();
    const range = {
      from: origins[0] ?? this.state.origin ?? "",
      to: origins[origins.length - 1] ?? this.state.origin ?? "",
    };
    await renderForecastView(client, byId("forecast-panel"), this.state);
    await renderDecomposition(
      client,
      byId("decomposition-panel"),
      this.state,
      this.hiddenComponents,
      (component) => {
        if (this.hiddenComponents.has(component)) this.hiddenComponents.delete(component);
        else this.hiddenComponents.add(component);
        void this.refresh();
      },
    );
    await renderAttribution(client, byId("attribution-panel"), this.state, range);
    await renderHighError(client, byId("high-error-panel"), this.state, range);

    const workbenchHost = byId("workbench-panel");
    while (workbenchHost.firstChild) workbenchHost.removeChild(workbenchHost.firstChild);
    if (this.state.utility) {
      const buses = this.listing?.utilities.find((u) => u.id === this.state.utility)?.buses ?? [];
      new Workbench(client, workbenchHost, () => void this.refresh()).render(
        buses,
        this.state.utility,
        this.state.origin,
      );
    }
  }
}

new App().start();
