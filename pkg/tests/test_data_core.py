"""Ingestion, cleaning, exclusion, splitting, and hierarchy statistics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcast.cleaning import clean_series, exclude_unusable
from gridcast.errors import CleaningError, DataError, IngestError
from gridcast.hierarchy import compute_hierarchy_stats
from gridcast.io import ingest_csv, read_hierarchy_csv, write_csv
from gridcast.series import (
    Level,
    LoadSeries,
    SeriesId,
    SplitSpec,
    format_hour,
    parse_hour,
    split,
)

T0 = parse_hour("2019-01-01T00:00:00")


def make_series(load, sid="b1", level=Level.BUS, start=T0, temp=None):
    load = np.asarray(load, dtype=float)
    temp = np.full(len(load), 60.0) if temp is None else np.asarray(temp, dtype=float)
    return LoadSeries(SeriesId(sid, level), start, load, temp)


def csv_text(rows):
    return "timestamp,series_id,level,load_mw,temp_f\n" + "\n".join(rows) + "\n"


# ---------------------------------------------------------------- ingestion


def test_ingest_two_series_48_hours(tmp_path):
    rows = []
    for sid in ("a", "b"):
        for h in range(48):
            rows.append(f"{format_hour(T0 + h)},{sid},bus,{10 + h},55.0")
    path = tmp_path / "two.csv"
    path.write_text(csv_text(rows))
    series = ingest_csv(path, Level.BUS)
    assert [s.series.id for s in series] == ["a", "b"]
    assert all(len(s) == 48 for s in series)
    assert series[0].load[5] == 15.0


def test_ingest_duplicate_timestamp_keeps_first(tmp_path):
    rows = [
        f"{format_hour(T0)},a,bus,1.0,50",
        f"{format_hour(T0 + 1)},a,bus,2.0,50",
        f"{format_hour(T0 + 1)},a,bus,99.0,50",
    ]
    path = tmp_path / "dup.csv"
    path.write_text(csv_text(rows))
    (s,) = ingest_csv(path, Level.BUS)
    assert len(s) == 2
    assert s.load[1] == 2.0


def test_ingest_gap_inserts_missing_markers(tmp_path):
    # expected grid built by hand: hours 0,1 observed, 2-4 missing, 5 observed
    rows = [f"{format_hour(T0 + h)},a,bus,{float(h)},50" for h in (0, 1, 5)]
    path = tmp_path / "gap.csv"
    path.write_text(csv_text(rows))
    (s,) = ingest_csv(path, Level.BUS)
    assert len(s) == 6
    expected = np.array([0.0, 1.0, np.nan, np.nan, np.nan, 5.0])
    np.testing.assert_array_equal(np.isnan(s.load), np.isnan(expected))
    np.testing.assert_array_equal(s.load[~np.isnan(expected)], expected[~np.isnan(expected)])


def test_ingest_missing_load_field_is_marker(tmp_path):
    rows = [f"{format_hour(T0)},a,bus,,50", f"{format_hour(T0 + 1)},a,bus,3.5,50"]
    path = tmp_path / "empty.csv"
    path.write_text(csv_text(rows))
    (s,) = ingest_csv(path, Level.BUS)
    assert np.isnan(s.load[0]) and s.load[1] == 3.5


@pytest.mark.parametrize(
    "bad_row, fragment",
    [
        ("2019-01-01T00:30:00,a,bus,1.0,50", "line 2"),
        ("not-a-time,a,bus,1.0,50", "line 2"),
        (f"{format_hour(T0)},a,bus,abc,50", "line 2"),
        (f"{format_hour(T0)},a,zone,1.0,50", "line 2"),
    ],
)
def test_ingest_errors_name_row(tmp_path, bad_row, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(csv_text([bad_row]))
    with pytest.raises(IngestError, match=fragment):
        ingest_csv(path, Level.BUS)


def test_ingest_filters_other_level(tmp_path):
    rows = [f"{format_hour(T0)},u,utility,5.0,50", f"{format_hour(T0)},a,bus,1.0,50"]
    path = tmp_path / "mixed.csv"
    path.write_text(csv_text(rows))
    assert [s.series.id for s in ingest_csv(path, Level.BUS)] == ["a"]
    assert [s.series.id for s in ingest_csv(path, Level.UTILITY)] == ["u"]


def test_csv_round_trip(tmp_path):
    s = make_series([1.0, np.nan, 3.0])
    path = tmp_path / "rt.csv"
    write_csv(path, [s])
    (back,) = ingest_csv(path, Level.BUS)
    np.testing.assert_array_equal(np.isnan(back.load), np.isnan(s.load))
    assert back.load[0] == 1.0 and back.load[2] == 3.0
    assert back.start == s.start


def test_hierarchy_csv(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("utility_id,bus_id\nU,a\nU,b\n")
    assert read_hierarchy_csv(path) == {"U": ["a", "b"]}


# ----------------------------------------------------------------- cleaning


def test_linear_midpoint():
    s = make_series([1.0, np.nan, 3.0])
    cleaned, report = clean_series(s)
    np.testing.assert_allclose(cleaned.load, [1.0, 2.0, 3.0])
    assert report.per_series[str(s.series)]["load"]["linear_imputed"] == 1


def test_outlier_flagged_and_reimputed_to_constant():
    # 100 constants plus one spike: the spike's z-score is sqrt(100) = 10 > 3,
    # hand-checked against the 3-sigma bound below.
    values = np.full(101, 10.0)
    values[50] = 30.0
    mean, std = values.mean(), values.std()
    assert abs(30.0 - mean) > 3 * std
    cleaned, report = clean_series(make_series(values))
    np.testing.assert_allclose(cleaned.load, np.full(101, 10.0))
    assert report.per_series["bus:b1"]["load"]["outliers_replaced"] == 1


def test_long_gap_uses_rolling_mean_not_interpolation():
    # independent oracle: re-implement both fill rules and compare flags;
    # bounded noise so no value trips the outlier rule first
    n = 600
    rng = np.random.default_rng(0)
    base = 50 + rng.uniform(-1, 1, n)
    values = base.copy()
    gap_start, gap_len = 300, 25
    values[gap_start : gap_start + gap_len] = np.nan
    cleaned, report = clean_series(make_series(values))

    linear_fill = np.interp(
        np.arange(gap_start, gap_start + gap_len),
        [gap_start - 1, gap_start + gap_len],
        [values[gap_start - 1], values[gap_start + gap_len]],
    )
    rolling_fill = values.copy()
    for i in range(gap_start, gap_start + gap_len):
        window = rolling_fill[max(0, i - 168) : i]
        rolling_fill[i] = window[~np.isnan(window)].mean()

    stats = report.per_series["bus:b1"]["load"]
    assert stats["rolling_imputed"] == 25 and stats["linear_imputed"] == 0
    got = cleaned.load[gap_start : gap_start + gap_len]
    np.testing.assert_allclose(got, rolling_fill[gap_start : gap_start + gap_len])
    assert not np.allclose(got, linear_fill)


def test_short_gap_at_20_hours_is_linear():
    n = 400
    values = np.sin(np.arange(n) / 7.0) + 10
    values[100:120] = np.nan
    _, report = clean_series(make_series(values))
    stats = report.per_series["bus:b1"]["load"]
    assert stats["linear_imputed"] == 20 and stats["rolling_imputed"] == 0


def test_leading_gap_uses_fallback_mean():
    values = np.concatenate([[np.nan] * 3, np.full(50, 7.0)])
    cleaned, _ = clean_series(make_series(values))
    np.testing.assert_allclose(cleaned.load[:3], 7.0)


def test_all_missing_errors():
    with pytest.raises(CleaningError):
        clean_series(make_series([np.nan, np.nan, 1.0]))


def test_cleaning_idempotent_on_load_like_data():
    # representative load data: seasonal + noise with injected gaps/outliers
    rng = np.random.default_rng(3)
    n = 2000
    values = 40 + 8 * np.sin(2 * np.pi * np.arange(n) / 24) + rng.normal(0, 1.5, n)
    values[200:230] = np.nan
    values[700:705] = np.nan
    values[1000] = 400.0
    once, _ = clean_series(make_series(values))
    twice, report2 = clean_series(once)
    np.testing.assert_array_equal(once.load, twice.load)
    stats = report2.per_series["bus:b1"]["load"]
    assert stats["outliers_replaced"] == 0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-100, max_value=100).map(lambda x: round(x, 6)),
        min_size=5,
        max_size=80,
    ),
    st.sets(st.integers(min_value=0, max_value=79), max_size=10),
)
def test_cleaning_never_alters_in_range_observed_values(values, missing_idx):
    v = np.asarray(values, dtype=float)
    for i in missing_idx:
        if i < len(v):
            v[i] = np.nan
    observed = ~np.isnan(v)
    if observed.sum() < 2:
        return
    mean, std = v[observed].mean(), v[observed].std()
    cleaned, _ = clean_series(make_series(v))
    in_range = observed & (np.abs(v - mean) <= 3 * std)
    np.testing.assert_array_equal(cleaned.load[in_range], v[in_range])


# ---------------------------------------------------------------- exclusion


THREE_YEARS = 3 * 8760


def full_series(load_fn, sid="b1", n=THREE_YEARS):
    return make_series(load_fn(n), sid=sid)


def test_exclude_constant():
    s = full_series(lambda n: np.full(n, 5.0))
    spec = SplitSpec.from_series(s, 0.8)
    kept, dropped = exclude_unusable([s], spec)
    assert kept == [] and dropped[0].reason == "constant"


def test_exclude_missing_ratio():
    # 25% of hours missing (> 20%) while the training window still holds
    # more than one observed year, so missing_ratio is the firing rule
    s = make_series(10 + np.sin(np.arange(THREE_YEARS, dtype=float)))
    n_missing = int(0.25 * THREE_YEARS) + 1
    s.load[15000 : 15000 + n_missing] = np.nan
    spec = SplitSpec.from_series(s, 0.8)
    assert ((~np.isnan(s.load)) & (s.hours() < spec.boundary)).sum() >= 8760
    _, dropped = exclude_unusable([s], spec)
    assert dropped[0].reason == "missing_ratio"


def test_exclude_short_training():
    s = make_series(np.ones(9000) + np.arange(9000) % 3)
    s.load[:5000] = np.nan
    spec = SplitSpec.from_series(s, 0.8)
    _, dropped = exclude_unusable([s], spec)
    assert dropped[0].reason == "short_training"


def test_exclude_missing_tail():
    def gen(n):
        v = 10 + np.cos(np.arange(n) / 9.0)
        return v

    s = full_series(gen)
    spec = SplitSpec.from_series(s, 0.8)
    tail_lo = spec.boundary - 15 * 24 - s.start
    s.load[tail_lo : spec.boundary - s.start] = np.nan
    _, dropped = exclude_unusable([s], spec)
    assert dropped[0].reason == "missing_tail"


def test_full_clean_series_kept():
    s = full_series(lambda n: 10 + np.cos(np.arange(n) / 9.0))
    kept, dropped = exclude_unusable([s], SplitSpec.from_series(s, 0.8))
    assert dropped == [] and kept == [s]


# ------------------------------------------------------------------ split


def test_split_80_20():
    s = make_series(np.arange(100.0))
    train, test = split(s, SplitSpec.from_series(s, 0.8))
    assert len(train) == 80 and len(test) == 20
    assert train.end == test.start


@given(st.integers(min_value=2, max_value=500), st.floats(min_value=0.01, max_value=0.99))
def test_split_is_partition(n, fraction):
    s = make_series(np.arange(float(n)))
    spec = SplitSpec.from_series(s, fraction)
    if not s.start < spec.boundary < s.end:
        return
    train, test = split(s, spec)
    np.testing.assert_array_equal(np.concatenate([train.load, test.load]), s.load)
    assert train.end == test.start and len(train) + len(test) == n


def test_split_fraction_one_errors():
    s = make_series(np.arange(10.0))
    with pytest.raises(DataError):
        SplitSpec.from_series(s, 1.0)


def test_split_boundary_outside_errors():
    s = make_series(np.arange(10.0))
    with pytest.raises(DataError):
        split(s, SplitSpec(0.5, T0 + 500))


# --------------------------------------------------------------- hierarchy


def test_identical_buses_even_proportions():
    a = make_series(np.full(100, 4.0), sid="a")
    b = make_series(np.full(100, 4.0), sid="b")
    spec = SplitSpec.from_series(a, 0.8)
    u = make_series(np.full(100, 8.0), sid="U", level=Level.UTILITY)
    h = compute_hierarchy_stats(u, [a, b], spec)
    np.testing.assert_allclose(h.proportions, [0.5, 0.5])
    assert h.agg_scale == pytest.approx(1.0)


def test_proportions_quarter_three_quarters():
    a = make_series(np.full(100, 1.0), sid="a")
    b = make_series(np.full(100, 3.0), sid="b")
    u = make_series(np.full(100, 4.0), sid="U", level=Level.UTILITY)
    h = compute_hierarchy_stats(u, [a, b], SplitSpec.from_series(a, 0.8))
    np.testing.assert_allclose(h.proportions, [0.25, 0.75])


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(min_value=0.1, max_value=50), min_size=2, max_size=8),
    st.integers(min_value=0, max_value=10_000),
)
def test_proportions_sum_to_one(means, seed):
    rng = np.random.default_rng(seed)
    buses = [
        make_series(m + rng.uniform(0, 0.1, 200), sid=f"b{i}") for i, m in enumerate(means)
    ]
    u = make_series(np.sum([b.load for b in buses], axis=0), sid="U", level=Level.UTILITY)
    h = compute_hierarchy_stats(u, buses, SplitSpec.from_series(u, 0.8))
    assert abs(h.proportions.sum() - 1.0) <= 1e-9
    assert h.agg_scale > 0


def test_zero_mean_aggregate_errors():
    a = make_series(np.zeros(100), sid="a")
    u = make_series(np.zeros(100), sid="U", level=Level.UTILITY)
    with pytest.raises(DataError):
        compute_hierarchy_stats(u, [a], SplitSpec.from_series(a, 0.8))
