#!/usr/bin/env python3
"""Record a deterministic service session for the dashboard's snapshot tests.

Builds a small synthetic dataset, trains a quick model, publishes bundles
into a store, runs the API in-process, and captures every payload the UI
consumes (including an adjustment dry-run and the post-commit adjusted
view) into frontend/fixtures/session.json.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from gridcast.cleaning import clean_all
from gridcast.model import HitsGamConfig
from gridcast.pipeline import (
    ModelSet,
    dataset_split_spec,
    eval_origins_for,
    hierarchy_from_data,
    hitsgam_bundles,
    reconcile_bundles,
    train_splits,
)
from gridcast.series import format_hour
from gridcast.service import ServiceDataset, create_app
from gridcast.store import ForecastStore
from gridcast.synth import SynthSpec, generate
from gridcast.training import PoolingMode, PoolingSpec, fit

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "session.json"

CFG = HitsGamConfig(
    n_lags=96,
    horizon=33,
    quantiles=(0.01, 0.5, 0.99),
    yearly_order=2,
    weekly_order=3,
    daily_order=4,
    ar_layers=(16, 8),
    lagged_reg_layers=(8,),
    batch_size=128,
    epochs=4,
)


def main(tmp_store: Path | None = None) -> dict:
    data = generate(SynthSpec(n_buses=5, hours=24 * 70, seed=17, proportion_drift=0.15))
    buses, _ = clean_all(data.buses)
    (utility,), _ = clean_all([data.utility])
    split_spec = dataset_split_spec(buses + [utility], 0.8)
    model = ModelSet(fit(train_splits(buses, split_spec), PoolingSpec(PoolingMode.GLOBAL), cfg=CFG, seed=2))
    origins = eval_origins_for(buses + [utility], split_spec)[:6]
    hierarchy = hierarchy_from_data(utility, buses, split_spec)
    bundles = hitsgam_bundles(model, buses, origins)
    bundles += reconcile_bundles(bundles, hierarchy, "bottom_up")

    store_dir = tmp_store or Path("/tmp/gridcast_ui_fixture_store")
    if store_dir.exists():
        import shutil

        shutil.rmtree(store_dir)
    store = ForecastStore(store_dir)
    for b in bundles:
        store.publish(b, "hitsgam")
    dataset = ServiceDataset(
        actuals={s.series: s for s in buses} | {utility.series: utility},
        hierarchies={utility.series.id: hierarchy},
    )
    client = TestClient(create_app(store, dataset))

    origin = format_hour(origins[2])
    lo, hi = format_hour(origins[0]), format_hour(origins[-1])
    uid = utility.series.id
    bus_id = buses[0].series.id

    def get(path: str, params: dict | None = None) -> dict:
        response = client.get(path, params=params)
        assert response.status_code == 200, (path, response.text)
        return response.json()

    session: dict = {
        "origin": origin,
        "utility": uid,
        "bus": bus_id,
        "series": get("/v1/series"),
        "forecast_utility": get(f"/v1/forecast/utility/{uid}", {"origin": origin}),
        "components_bus": get(f"/v1/forecast/bus/{bus_id}/components", {"origin": origin}),
        "attribution": get(
            "/v1/diagnostics/attribution",
            {"utility": uid, "from": lo, "to": hi, "top_n": 3},
        ),
        "high_error": get(
            "/v1/diagnostics/high-error", {"utility": uid, "from": lo, "to": hi}
        ),
    }

    draft = {
        "scope_level": "bus",
        "scope_ids": [bus_id, buses[1].series.id],
        "kind": "load_factor",
        "load_factor": 0.4,
        "valid_from": format_hour(origins[2] + 1),
        "valid_to": format_hour(origins[2] + 34),
        "author": "fixture",
    }
    session["draft"] = draft
    preview = client.post("/v1/adjustments", params={"dry_run": "true", "origin": origin}, json=draft)
    assert preview.status_code == 200, preview.text
    session["dry_run"] = preview.json()
    commit = client.post("/v1/adjustments", params={"origin": origin}, json=draft)
    assert commit.status_code == 200, commit.text
    session["commit"] = commit.json()
    session["adjusted_after_commit"] = get(f"/v1/forecast/utility/{uid}/adjusted", {"origin": origin})
    session["adjustments"] = get("/v1/adjustments")
    return session


if __name__ == "__main__":
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(main(), indent=1, sort_keys=True))
    print(f"wrote {OUT} ({OUT.stat().st_size // 1024} KiB)")
