"""Forecast store persistence, adjustments, and the HTTP API."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gridcast.errors import ConflictError, DuplicateKeyError, StoreError
from gridcast.hierarchy import Hierarchy
from gridcast.model.forecast import ForecastBundle
from gridcast.series import Level, LoadSeries, SeriesId, format_hour, parse_hour
from gridcast.service import ServiceDataset, create_app
from gridcast.store import AdjustmentRecord, ForecastStore, apply_adjustments

T0 = parse_hour("2021-03-01T00:00:00")
ORIGIN = T0 + 14
U = SeriesId("U", Level.UTILITY)
BUS_A = SeriesId("a", Level.BUS)
BUS_B = SeriesId("b", Level.BUS)


def flat_bundle(sid, value, origin=ORIGIN, horizon=33):
    value = float(value)
    forecast = np.stack(
        [np.full(horizon, value * 0.9), np.full(horizon, value), np.full(horizon, value * 1.1)]
    )
    components = {
        "trend": np.full(horizon, value),
        "seasonality": np.zeros(horizon),
        "events": np.zeros(horizon),
        "autoregression": np.zeros(horizon),
        "temperature": np.zeros(horizon),
    }
    return ForecastBundle(sid, origin, (0.01, 0.5, 0.99), forecast, components)


def hierarchy():
    return Hierarchy(U, (BUS_A, BUS_B), np.array([0.3, 0.7]), 1.0)


# -------------------------------------------------------------------- store


def test_publish_get_round_trip(tmp_path):
    store = ForecastStore(tmp_path)
    bundle = flat_bundle(BUS_A, 10.0)
    store.publish(bundle, "m1")
    back = store.get(BUS_A, ORIGIN, "m1")
    assert back == bundle


def test_duplicate_publish_conflicts(tmp_path):
    store = ForecastStore(tmp_path)
    store.publish(flat_bundle(BUS_A, 10.0), "m1")
    with pytest.raises(DuplicateKeyError):
        store.publish(flat_bundle(BUS_A, 11.0), "m1")
    store.publish(flat_bundle(BUS_A, 11.0), "m2")  # new tag is fine


def test_restart_persistence(tmp_path):
    bundle = flat_bundle(BUS_A, 10.0)
    ForecastStore(tmp_path).publish(bundle, "m1")
    reopened = ForecastStore(tmp_path)
    assert reopened.get(BUS_A, ORIGIN, "m1") == bundle
    assert reopened.origins(BUS_A, "m1") == [ORIGIN]
    assert reopened.series_ids(Level.BUS) == ["a"]


def test_get_missing_key(tmp_path):
    store = ForecastStore(tmp_path)
    with pytest.raises(StoreError):
        store.get(BUS_A, ORIGIN, "m1")


# -------------------------------------------------------------- adjustments


def record_factor(factor, buses=("a",), lo=ORIGIN + 1, hi=ORIGIN + 34, **kw):
    return AdjustmentRecord.new(
        scope_level=Level.BUS,
        scope_ids=tuple(buses),
        kind="load_factor",
        load_factor=factor,
        valid_from=lo,
        valid_to=hi,
        author="op",
        **kw,
    )


def test_adjustment_validation():
    with pytest.raises(StoreError):
        record_factor(1.5)
    with pytest.raises(StoreError):
        record_factor(0.5, lo=ORIGIN + 5, hi=ORIGIN + 5)
    with pytest.raises(StoreError):
        AdjustmentRecord.new(
            scope_level=Level.BUS,
            scope_ids=("a",),
            kind="component_offset",
            component="nonsense",
            offsets=(1.0,),
            valid_from=ORIGIN,
            valid_to=ORIGIN + 1,
            author="op",
        )


def test_journal_round_trip_and_active_filter(tmp_path):
    store = ForecastStore(tmp_path)
    r1 = record_factor(0.5, lo=ORIGIN, hi=ORIGIN + 10)
    r2 = record_factor(0.8, buses=("b",), lo=ORIGIN + 20, hi=ORIGIN + 30)
    store.append_adjustment(r1)
    store.append_adjustment(r2)
    assert [r.id for r in store.adjustments()] == [r1.id, r2.id]
    active = store.adjustments(active_at=ORIGIN + 5)
    assert [r.id for r in active] == [r1.id]


def test_overlapping_load_factors_rejected(tmp_path):
    store = ForecastStore(tmp_path)
    store.append_adjustment(record_factor(0.5, lo=ORIGIN, hi=ORIGIN + 10))
    with pytest.raises(ConflictError):
        store.append_adjustment(record_factor(0.7, lo=ORIGIN + 5, hi=ORIGIN + 15))
    # disjoint window or disjoint bus set is fine
    store.append_adjustment(record_factor(0.7, lo=ORIGIN + 10, hi=ORIGIN + 15))
    store.append_adjustment(record_factor(0.7, buses=("b",), lo=ORIGIN, hi=ORIGIN + 10))


def test_factor_identity_and_zero():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    identity = apply_adjustments(buses, h, [record_factor(1.0)])
    np.testing.assert_allclose(identity.utility.median(), 100.0)
    np.testing.assert_allclose(identity.delta_mw, 0.0)

    zero = apply_adjustments(buses, h, [record_factor(0.0)])
    np.testing.assert_allclose(zero.utility.median(), 90.0)
    np.testing.assert_allclose(zero.delta_mw, -10.0)
    # originals untouched
    np.testing.assert_allclose(buses[0].median(), 10.0)


def test_empty_journal_is_identity():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    view = apply_adjustments(buses, h, [])
    np.testing.assert_allclose(view.delta_mw, 0.0)
    np.testing.assert_array_equal(view.utility.median(), 100.0)


def test_replay_idempotent():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    records = [record_factor(0.5)]
    v1 = apply_adjustments(buses, h, records)
    v2 = apply_adjustments(buses, h, records)
    np.testing.assert_array_equal(v1.utility.forecast, v2.utility.forecast)
    np.testing.assert_array_equal(v1.delta_mw, v2.delta_mw)


def test_component_offset_drops_bus_and_utility():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    record = AdjustmentRecord.new(
        scope_level=Level.BUS,
        scope_ids=("a",),
        kind="component_offset",
        component="seasonality",
        offsets=tuple([-5.0] * 33),
        valid_from=ORIGIN + 1,
        valid_to=ORIGIN + 34,
        author="op",
    )
    view = apply_adjustments(buses, h, [record])
    bus_a = [b for b in view.buses if b.series == BUS_A][0]
    np.testing.assert_allclose(bus_a.median(), 5.0)
    np.testing.assert_allclose(bus_a.components["seasonality"], -5.0)
    np.testing.assert_allclose(view.utility.median(), 95.0)
    np.testing.assert_allclose(view.delta_mw, -5.0)
    # decomposition additivity still holds (validated in the constructor)
    total = np.sum([bus_a.components[k] for k in bus_a.components], axis=0)
    np.testing.assert_allclose(total, bus_a.median(), atol=1e-9)


def test_partial_window_factor():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    view = apply_adjustments(buses, h, [record_factor(0.0, lo=ORIGIN + 1, hi=ORIGIN + 6)])
    assert view.utility.median()[0] == pytest.approx(90.0)
    assert view.utility.median()[5] == pytest.approx(100.0)


def test_utility_scope_expands_to_buses():
    h = hierarchy()
    buses = [flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)]
    record = AdjustmentRecord.new(
        scope_level=Level.UTILITY,
        scope_ids=("U",),
        kind="load_factor",
        load_factor=0.5,
        valid_from=ORIGIN + 1,
        valid_to=ORIGIN + 34,
        author="op",
    )
    view = apply_adjustments(buses, h, [record])
    np.testing.assert_allclose(view.utility.median(), 50.0)


# ------------------------------------------------------------------ service


@pytest.fixture
def service(tmp_path):
    store = ForecastStore(tmp_path / "store")
    h = hierarchy()
    for sid, value in ((BUS_A, 10.0), (BUS_B, 90.0)):
        store.publish(flat_bundle(sid, value), "hitsgam")
    from gridcast.reconcile import bottom_up

    store.publish(bottom_up([flat_bundle(BUS_A, 10.0), flat_bundle(BUS_B, 90.0)], h), "hitsgam")
    n = 200
    actuals = {
        BUS_A: LoadSeries(BUS_A, T0, np.full(n, 11.0), np.full(n, 60.0)),
        BUS_B: LoadSeries(BUS_B, T0, np.full(n, 88.0), np.full(n, 60.0)),
        U: LoadSeries(U, T0, np.full(n, 99.0), np.full(n, 60.0)),
    }
    dataset = ServiceDataset(actuals=actuals, hierarchies={"U": h})
    app = create_app(store, dataset)
    return TestClient(app)


def test_health(service):
    assert service.get("/v1/health").json() == {"status": "ok"}


def test_series_listing(service):
    body = service.get("/v1/series").json()
    assert body["utilities"] == [{"id": "U", "buses": ["a", "b"]}]
    assert body["stored"]["bus"]["a"] == [format_hour(ORIGIN)]


def test_get_forecast_and_components(service):
    r = service.get(f"/v1/forecast/bus/a?origin={format_hour(ORIGIN)}")
    assert r.status_code == 200
    body = r.json()
    assert body["forecast"][1] == [10.0] * 33
    assert body["actuals"][0] == 11.0
    r = service.get(f"/v1/forecast/bus/a/components?origin={format_hour(ORIGIN)}")
    assert r.json()["components"]["trend"] == [10.0] * 33


def test_unknown_origin_404(service):
    r = service.get(f"/v1/forecast/bus/a?origin={format_hour(ORIGIN + 24)}")
    assert r.status_code == 404


def test_adjustment_flow_preview_equals_commit(service):
    draft = {
        "scope_level": "bus",
        "scope_ids": ["a"],
        "kind": "load_factor",
        "load_factor": 0.0,
        "valid_from": format_hour(ORIGIN + 1),
        "valid_to": format_hour(ORIGIN + 34),
    }
    params = {"dry_run": "true", "origin": format_hour(ORIGIN)}
    preview = service.post("/v1/adjustments", json=draft, params=params).json()
    assert preview["dry_run"] is True
    # nothing persisted by the dry run
    assert service.get("/v1/adjustments").json()["adjustments"] == []

    committed = service.post(
        "/v1/adjustments", json=draft, params={"origin": format_hour(ORIGIN)}
    ).json()
    assert committed["dry_run"] is False
    assert preview["preview"]["utility"]["forecast"] == committed["preview"]["utility"]["forecast"]

    adjusted = service.get(f"/v1/forecast/utility/U/adjusted?origin={format_hour(ORIGIN)}").json()
    assert adjusted["utility"]["forecast"][1] == [90.0] * 33
    assert adjusted["delta_mw"] == [-10.0] * 33


def test_conflicting_adjustment_409(service):
    draft = {
        "scope_level": "bus",
        "scope_ids": ["a"],
        "kind": "load_factor",
        "load_factor": 0.5,
        "valid_from": format_hour(ORIGIN + 1),
        "valid_to": format_hour(ORIGIN + 34),
    }
    assert service.post("/v1/adjustments", json=draft).status_code == 200
    assert service.post("/v1/adjustments", json=draft).status_code == 409


def test_invalid_adjustment_422(service):
    draft = {
        "scope_level": "bus",
        "scope_ids": ["a"],
        "kind": "load_factor",
        "load_factor": 1.5,
        "valid_from": format_hour(ORIGIN + 1),
        "valid_to": format_hour(ORIGIN + 34),
    }
    assert service.post("/v1/adjustments", json=draft).status_code == 422


def test_attribution_endpoint(service):
    params = {
        "utility": "U",
        "from": format_hour(ORIGIN),
        "to": format_hour(ORIGIN),
        "top_n": 1,
    }
    body = service.get("/v1/diagnostics/attribution", params=params).json()
    assert body["top_buses"] == ["b"]
    row = body["rows"][0]
    # residuals: a: 11-10 = 1, b: 88-90 = -2 -> utility -1
    assert row["utility_residual_mw"] == pytest.approx(-1.0)
    assert row["bus_residuals_mw"]["b"] == pytest.approx(-2.0)
    assert row["remainder_residual_mw"] == pytest.approx(1.0)


def test_high_error_endpoint(service):
    params = {
        "utility": "U",
        "from": format_hour(ORIGIN),
        "to": format_hour(ORIGIN),
    }
    body = service.get("/v1/diagnostics/high-error", params=params).json()
    assert set(body) == {"positive", "negative"}
    assert body["negative"]["buses"]["b"]["bias_share"] == pytest.approx(2.0)
