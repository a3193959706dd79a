"""Day-ahead evaluation protocol and error metrics.

One forecast origin per compute day at 14:00; only the 24 target-day hours
(horizon steps 10..33) are scored. RMSE, MAE, MAPE, MASE, and MSSE follow
the M-competition definitions with the 48-hour seasonal naive as the
scaling base. MAPE is reported as a flagged absent value whenever any
actual is zero; MASE/MSSE likewise when the naive error sum is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model.forecast import ForecastBundle
from .series import HOURS_PER_DAY, LoadSeries, SeriesId, date_of, hour_of_day

ORIGIN_HOUR = 14
TARGET_STEPS = np.arange(10, 34)  # 14:00 + 10h .. + 33h = target-day 00:00..23:00
NAIVE_LAG = 48

METRIC_NAMES = ("rmse", "mae", "mape", "mase", "msse")


def select_eval_origins(test_window: LoadSeries) -> list[int]:
    """All 14:00 origins whose full target day lies inside the window."""
    origins = []
    first = test_window.start + ((ORIGIN_HOUR - test_window.start) % HOURS_PER_DAY)
    for origin in range(first, test_window.end, HOURS_PER_DAY):
        if origin + int(TARGET_STEPS[-1]) < test_window.end:
            origins.append(origin)
    return origins


@dataclass(frozen=True)
class Metrics:
    rmse: float
    mae: float
    mape: float | None
    mase: float | None
    msse: float | None
    n_hours: int

    def to_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "mae": self.mae,
            "mape": self.mape,
            "mase": self.mase,
            "msse": self.msse,
            "n_hours": self.n_hours,
        }


def compute_metrics(actual: np.ndarray, predicted: np.ndarray, naive_base: np.ndarray) -> Metrics:
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    naive_base = np.asarray(naive_base, dtype=np.float64)
    if not len(actual) or actual.shape != predicted.shape or actual.shape != naive_base.shape:
        raise DataError("actual, predicted, and naive_base must share a non-empty shape")
    err = actual - predicted
    rmse = float(np.sqrt(np.mean(err**2)))
    mae = float(np.mean(np.abs(err)))
    mape = None
    if not np.any(actual == 0):
        mape = float(100.0 * np.mean(np.abs(err / actual)))
    naive_err = actual - naive_base
    abs_naive = float(np.sum(np.abs(naive_err)))
    sq_naive = float(np.sum(naive_err**2))
    mase = float(np.sum(np.abs(err)) / abs_naive) if abs_naive > 0 else None
    msse = float(np.sum(err**2) / sq_naive) if sq_naive > 0 else None
    return Metrics(rmse, mae, mape, mase, msse, len(actual))


def target_day_hours(bundle: ForecastBundle) -> np.ndarray:
    """Bundle hours that fall on the origin's target (next) day."""
    hours = bundle.hours()
    target_day = date_of(bundle.origin + (HOURS_PER_DAY - hour_of_day(bundle.origin)))
    mask = np.array([date_of(int(h)) == target_day for h in hours])
    return hours[mask]


def coverage(
    bundles: list[ForecastBundle],
    actuals: dict[SeriesId, LoadSeries],
    interval: tuple[float, float] = (0.01, 0.99),
) -> float:
    """Fraction of evaluated target-day hours with the actual inside the band."""
    lo_q, hi_q = interval
    inside = total = 0
    for b in bundles:
        series = actuals[b.series]
        hours = target_day_hours(b)
        sel = np.isin(b.hours(), hours)
        lo = b.quantile_row(lo_q)[sel]
        hi = b.quantile_row(hi_q)[sel]
        y = np.array([series.load[series.index_of(int(h))] for h in hours])
        inside += int(np.sum((y >= lo) & (y <= hi)))
        total += len(hours)
    if total == 0:
        raise DataError("no evaluated hours")
    return inside / total


@dataclass
class SeriesScore:
    series: SeriesId
    metrics: Metrics
    mean_load: float

    def to_dict(self) -> dict:
        return {
            "series_id": self.series.id,
            "level": self.series.level.value,
            "mean_load_mw": self.mean_load,
            **self.metrics.to_dict(),
        }


def _distribution(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "min": float(arr.min()),
        "q1": float(np.percentile(arr, 25)),
        "median": float(np.percentile(arr, 50)),
        "q3": float(np.percentile(arr, 75)),
        "max": float(arr.max()),
        "mean": float(arr.mean()),
    }


@dataclass
class MetricsReport:
    rows: list[SeriesScore]
    aggregate: dict
    distribution: dict
    weighted: bool

    def to_json_dict(self) -> dict:
        return {
            "series": [r.to_dict() for r in self.rows],
            "aggregate": self.aggregate,
            "distribution": self.distribution,
            "weighted": self.weighted,
        }

    def to_csv_table(self) -> str:
        lines = ["metric,min,q1,median,q3,max,mean"]
        for name in METRIC_NAMES:
            d = self.distribution.get(name)
            if d is None:
                continue
            lines.append(
                f"{name},{d['min']:.6g},{d['q1']:.6g},{d['median']:.6g},"
                f"{d['q3']:.6g},{d['max']:.6g},{d['mean']:.6g}"
            )
        return "\n".join(lines) + "\n"


def evaluate_run(
    forecasts: list[ForecastBundle],
    actuals: dict[SeriesId, LoadSeries],
    weighted: bool = False,
) -> MetricsReport:
    """Per-series metrics pooled over all evaluated target-day hours.

    ``actuals`` must hold the full cleaned series (training included) so the
    48h naive base never runs off the front of the test window. The
    aggregate row is the unweighted mean across series by default; with
    ``weighted=True`` series are weighted by their mean evaluated load.
    """
    by_series: dict[SeriesId, list[ForecastBundle]] = {}
    for b in forecasts:
        by_series.setdefault(b.series, []).append(b)

    rows = []
    for series_id in sorted(by_series):
        actual_series = actuals.get(series_id)
        if actual_series is None:
            raise DataError(f"no actuals supplied for {series_id}")
        y_all, p_all, n_all = [], [], []
        for b in sorted(by_series[series_id], key=lambda x: x.origin):
            hours = target_day_hours(b)
            sel = np.isin(b.hours(), hours)
            median = b.median()[sel]
            for h, pred in zip(hours, median):
                idx = actual_series.index_of(int(h))
                naive_idx = idx - NAIVE_LAG
                if naive_idx < 0:
                    raise DataError(
                        f"{series_id}: actuals do not reach {NAIVE_LAG}h before the first target hour"
                    )
                y_all.append(actual_series.load[idx])
                p_all.append(pred)
                n_all.append(actual_series.load[naive_idx])
        metrics = compute_metrics(np.array(y_all), np.array(p_all), np.array(n_all))
        rows.append(SeriesScore(series_id, metrics, float(np.mean(y_all))))

    weights = np.array([r.mean_load for r in rows]) if weighted else np.ones(len(rows))
    aggregate: dict = {"n_series": len(rows)}
    distribution: dict = {}
    for name in METRIC_NAMES:
        values = [getattr(r.metrics, name) for r in rows]
        present = [(v, w) for v, w in zip(values, weights) if v is not None]
        if not present:
            aggregate[name] = None
            continue
        vals = np.array([v for v, _ in present])
        wts = np.array([w for _, w in present])
        aggregate[name] = float(np.sum(vals * wts) / np.sum(wts))
        distribution[name] = _distribution(vals.tolist())
    return MetricsReport(rows=rows, aggregate=aggregate, distribution=distribution, weighted=weighted)


def naive_base_values(series: LoadSeries, hours: np.ndarray) -> np.ndarray:
    """y_{t-48} aligned to the given target hours."""
    idx = np.array([series.index_of(int(h)) - NAIVE_LAG for h in hours])
    if idx.min() < 0:
        raise DataError(f"{series.series}: naive base runs before the series start")
    return series.load[idx]
