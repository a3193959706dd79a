"""Error attribution, high-error profiles, and feature-vs-error tables."""

import numpy as np
import pytest

from gridcast.diagnostics import (
    attribute_errors,
    feature_error_profile,
    high_error_analysis,
)
from gridcast.errors import DataError
from gridcast.features import FEATURE_NAMES, FeatureVector
from gridcast.hierarchy import Hierarchy
from gridcast.model.forecast import ForecastBundle
from gridcast.series import Level, LoadSeries, SeriesId, parse_hour

T0 = parse_hour("2019-01-01T00:00:00")
U = SeriesId("U", Level.UTILITY)


def bus_ids(n):
    return [SeriesId(f"b{i}", Level.BUS) for i in range(n)]


def make_hierarchy(buses, props=None):
    props = np.full(len(buses), 1.0 / len(buses)) if props is None else np.asarray(props)
    return Hierarchy(U, tuple(buses), props, 1.0)


def bundle(sid, values, origin):
    values = np.asarray(values, dtype=float)
    return ForecastBundle(
        series=sid,
        origin=origin,
        quantiles=(0.5,),
        forecast=values[None, :],
        components=None,
        step_offset=10,  # 24 values covering exactly the target day
    )


def actuals_for(sid, values, start=T0):
    return LoadSeries(sid, start, np.asarray(values, dtype=float), np.full(len(values), 60.0))


def build_case(bus_values, bus_preds, n_days=2):
    """bus_values/bus_preds: mapping sid -> per-target-day-hour arrays."""
    buses = sorted(bus_values)
    origins = [T0 + 62 + d * 24 for d in range(n_days)]  # 14:00 with naive margin
    bundles = []
    actuals = {}
    n_hours_total = 62 + n_days * 24 + 40
    for sid in buses:
        load = np.full(n_hours_total, 10.0)
        for d, origin in enumerate(origins):
            lo = origin + 10 - T0
            load[lo : lo + 24] = bus_values[sid][d * 24 : (d + 1) * 24]
            bundles.append(bundle(sid, bus_preds[sid][d * 24 : (d + 1) * 24], origin))
        actuals[sid] = actuals_for(sid, load)
    return bundles, actuals, make_hierarchy(buses)


def test_perfect_forecast_zero_residuals():
    (sid,) = bus_ids(1)
    vals = {sid: np.full(48, 7.0)}
    bundles, actuals, h = build_case(vals, vals)
    result = attribute_errors(bundles, actuals, h, top_n=1)
    assert all(r.utility_residual == 0.0 for r in result.rows)
    assert all(v == 0.0 for r in result.rows for v in r.bus_residuals.values())


def test_error_cancellation():
    a, b = bus_ids(2)
    actual = {a: np.full(48, 10.0), b: np.full(48, 10.0)}
    pred = {a: np.full(48, 8.0), b: np.full(48, 12.0)}  # residuals +2 and -2
    bundles, actuals, h = build_case(actual, pred)
    result = attribute_errors(bundles, actuals, h, top_n=2)
    for row in result.rows:
        assert row.utility_residual == pytest.approx(0.0)
        assert sum(abs(v) for v in row.bus_residuals.values()) == pytest.approx(4.0)


def test_top_n_remainder_sums_smaller_buses():
    a, b, c = bus_ids(3)
    actual = {a: np.full(48, 100.0), b: np.full(48, 10.0), c: np.full(48, 5.0)}
    pred = {a: np.full(48, 99.0), b: np.full(48, 9.0), c: np.full(48, 3.0)}
    bundles, actuals, h = build_case(actual, pred)
    result = attribute_errors(bundles, actuals, h, top_n=1)
    assert result.top_buses == [a]
    for row in result.rows:
        assert row.remainder_residual == pytest.approx(1.0 + 2.0)
        assert row.utility_residual == pytest.approx(
            sum(row.bus_residuals.values()) + row.remainder_residual
        )


def test_additivity_invariant():
    rng = np.random.default_rng(4)
    ids = bus_ids(4)
    actual = {s: 20 + rng.normal(0, 2, 48) for s in ids}
    pred = {s: 20 + rng.normal(0, 2, 48) for s in ids}
    bundles, actuals, h = build_case(actual, pred)
    result = attribute_errors(bundles, actuals, h, top_n=2)
    for row in result.rows:
        total = sum(row.bus_residuals.values()) + row.remainder_residual
        assert row.utility_residual == pytest.approx(total, abs=1e-6)


def test_increasing_top_n_never_changes_utility_residual():
    rng = np.random.default_rng(12)
    ids = bus_ids(4)
    actual = {s: 20 + rng.normal(0, 2, 48) for s in ids}
    pred = {s: 20 + rng.normal(0, 2, 48) for s in ids}
    bundles, actuals, h = build_case(actual, pred)
    for n in (1, 2, 3):
        small = attribute_errors(bundles, actuals, h, top_n=n)
        bigger = attribute_errors(bundles, actuals, h, top_n=n + 1)
        np.testing.assert_allclose(
            [r.utility_residual for r in small.rows],
            [r.utility_residual for r in bigger.rows],
            atol=1e-12,
        )


def test_non_bottom_up_utility_rejected():
    (sid,) = bus_ids(1)
    vals = {sid: np.full(48, 7.0)}
    bundles, actuals, h = build_case(vals, vals)
    bad_utility = [
        bundle(U, np.full(24, 99.0), o) for o in sorted({b.origin for b in bundles})
    ]
    with pytest.raises(DataError):
        attribute_errors(bundles, actuals, h, top_n=1, utility_forecasts=bad_utility)


# --------------------------------------------------------- high error study


def attribution_from_matrix(res_matrix):
    """rows: hours x buses residuals; loads all equal."""
    n_hours, n_buses = res_matrix.shape
    ids = bus_ids(n_buses)
    actual = {}
    pred = {}
    n_days = n_hours // 24
    for j, sid in enumerate(ids):
        base = np.full(n_hours, 10.0)
        actual[sid] = base
        pred[sid] = base - res_matrix[:, j]  # residual = actual - pred
    bundles, actuals, h = build_case(actual, pred, n_days=n_days)
    return attribute_errors(bundles, actuals, h, top_n=n_buses)


def test_single_bus_carries_all_error():
    rng = np.random.default_rng(0)
    res = rng.normal(0, 1, (48, 1)) + 0.5
    result = attribution_from_matrix(res)
    pos, neg = high_error_analysis(result)
    (sid,) = result.top_buses
    assert pos.bias_share[sid] == pytest.approx(1.0)
    assert pos.mae_share[sid] == pytest.approx(1.0)
    assert pos.overall_load_share[sid] == pytest.approx(1.0)


def test_opposite_sign_bus_negative_bias_share():
    rng = np.random.default_rng(1)
    driver = np.abs(rng.normal(2, 0.5, 48))  # always positive residual
    opposer = -0.3 * driver  # always opposite the utility sign
    res = np.stack([driver, opposer], axis=1)
    result = attribution_from_matrix(res)
    pos, _ = high_error_analysis(result)
    a, b = bus_ids(2)
    assert pos.bias_share[b] < 0
    assert abs(pos.bias_share[a]) <= pos.mae_share[a] + 1e-12


def test_two_equal_buses_split_bias():
    rng = np.random.default_rng(2)
    shared = rng.normal(1, 0.4, 48)
    res = np.stack([shared, shared], axis=1)
    result = attribution_from_matrix(res)
    pos, neg = high_error_analysis(result)
    for sid in bus_ids(2):
        assert pos.bias_share[sid] == pytest.approx(0.5)
        assert neg.bias_share[sid] == pytest.approx(0.5)


def test_decile_selection_size_and_disjoint():
    rng = np.random.default_rng(3)
    res = rng.normal(0, 1, (96, 3))
    result = attribution_from_matrix(res)
    pos, neg = high_error_analysis(result, quantile=0.10)
    import math

    expect = math.ceil(0.10 * 96)
    assert len(pos.selected_hours) == expect
    assert len(neg.selected_hours) == expect
    assert not (set(pos.selected_hours) & set(neg.selected_hours))


def test_bias_bounded_by_mae_on_sign_uniform_selection():
    rng = np.random.default_rng(5)
    res = rng.normal(0.5, 1.0, (240, 4))
    result = attribution_from_matrix(res)
    pos, neg = high_error_analysis(result)
    for profile in (pos, neg):
        util = result.utility_residuals()
        for sid in bus_ids(4):
            assert abs(profile.bias_share[sid]) <= profile.mae_share[sid] + 1e-9
    total = sum(pos.overall_load_share.values())
    assert total == pytest.approx(1.0)


def test_order_invariance():
    rng = np.random.default_rng(6)
    res = rng.normal(0, 1, (48, 3))
    r1 = attribution_from_matrix(res)
    r2 = attribution_from_matrix(res)
    p1, _ = high_error_analysis(r1)
    p2, _ = high_error_analysis(r2)
    assert p1.bias_share == p2.bias_share


def test_too_few_rows():
    rng = np.random.default_rng(7)
    res = rng.normal(0, 1, (24, 2))[:5]
    # build a 5-row attribution directly
    result = attribution_from_matrix(rng.normal(0, 1, (24, 2)))
    result.rows = result.rows[:5]
    with pytest.raises(DataError):
        high_error_analysis(result)


# ------------------------------------------------------- feature-error table


def feature_vec(scale=1.0, lumpiness=1.0):
    values = dict.fromkeys(FEATURE_NAMES, 0.0)
    values.update(
        trend_strength=0.5 * scale,
        stability=1.0 * scale,
        lumpiness=lumpiness,
        entropy=0.5,
        acf1=0.1 * scale,
        acf10=0.2,
        seasonal_strength=0.6,
        spike=0.01,
        linearity=1.0,
        curvature=0.1,
        peak=14.0,
        trough=3.0,
    )
    return FeatureVector(**values)


def test_all_bus_scaled_iqr_is_one():
    rng = np.random.default_rng(8)
    ids = bus_ids(15)
    feats = {s: feature_vec(scale=float(rng.uniform(0.5, 2.0)), lumpiness=float(rng.uniform(0.5, 2))) for s in ids}
    mae = {s: float(rng.uniform(0.1, 5.0)) for s in ids}
    table = feature_error_profile(feats, mae, worst_n=10)
    for name in ("stability", "lumpiness"):
        assert table["features"][name]["all"]["iqr"] == pytest.approx(1.0)


def test_worst_equals_all_when_worst_n_covers_everything():
    rng = np.random.default_rng(9)
    ids = bus_ids(10)
    feats = {s: feature_vec(scale=float(rng.uniform(0.5, 2.0))) for s in ids}
    mae = {s: float(rng.uniform(0.1, 5.0)) for s in ids}
    table = feature_error_profile(feats, mae, worst_n=10)
    entry = table["features"]["stability"]
    assert entry["all"] == entry["worst"]


def test_planted_lumpy_worst_group_stands_out():
    rng = np.random.default_rng(10)
    ids = bus_ids(20)
    feats, mae = {}, {}
    for i, s in enumerate(ids):
        lumpy = 10.0 + float(rng.uniform(0, 3)) if i < 10 else 1.0 + float(rng.uniform(0, 0.2))
        feats[s] = feature_vec(scale=float(rng.uniform(0.8, 1.2)), lumpiness=lumpy)
        mae[s] = 5.0 if i < 10 else 0.5  # lumpy buses forecast worst
    table = feature_error_profile(feats, mae, worst_n=10)
    assert set(table["worst_buses"]) == {s.id for s in ids[:10]}
    worst_median = table["features"]["lumpiness"]["worst"]["median"]
    assert worst_median > 0.5  # far above the all-bus median in IQR units


def test_fewer_buses_than_worst_n():
    ids = bus_ids(3)
    feats = {s: feature_vec() for s in ids}
    mae = {s: 1.0 for s in ids}
    with pytest.raises(DataError):
        feature_error_profile(feats, mae, worst_n=10)
