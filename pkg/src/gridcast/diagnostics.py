"""Bus-level error attribution and high-error-situation analysis.

Residual convention throughout: actual - forecast (positive means the
model under-forecast). The utility residual of a bottom-up run is by
construction the sum of bus residuals; attribution rows expose the top-N
buses by load share and fold the rest into a remainder column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import FEATURE_NAMES, FeatureVector
from .hierarchy import Hierarchy
from .model.forecast import ForecastBundle
from .series import LoadSeries, SeriesId, format_hour


@dataclass
class AttributionRow:
    hour: int
    utility_residual: float
    bus_residuals: dict[SeriesId, float]  # top-N buses
    remainder_residual: float

    def to_dict(self) -> dict:
        return {
            "timestamp": format_hour(self.hour),
            "utility_residual_mw": self.utility_residual,
            "bus_residuals_mw": {s.id: v for s, v in self.bus_residuals.items()},
            "remainder_residual_mw": self.remainder_residual,
        }


@dataclass
class AttributionResult:
    rows: list[AttributionRow]
    top_buses: list[SeriesId]
    all_residuals: dict[SeriesId, np.ndarray]  # per-bus residual per row hour
    mean_loads: dict[SeriesId, float]

    def utility_residuals(self) -> np.ndarray:
        return np.array([r.utility_residual for r in self.rows])

    def to_json_dict(self) -> dict:
        return {
            "residual_convention": "actual_minus_forecast",
            "top_buses": [s.id for s in self.top_buses],
            "rows": [r.to_dict() for r in self.rows],
        }


def attribute_errors(
    bus_forecasts: list[ForecastBundle],
    bus_actuals: dict[SeriesId, LoadSeries],
    hierarchy: Hierarchy,
    top_n: int = 5,
    utility_forecasts: list[ForecastBundle] | None = None,
    eval_hours: dict[int, np.ndarray] | None = None,
) -> AttributionResult:
    """Per-hour bus residuals for a bottom-up run.

    ``eval_hours`` optionally restricts each origin to given hours
    (defaults to the bundle's full span). When utility bundles are passed
    they are checked for bottom-up coherence and rejected otherwise.
    """
    from .evaluation import target_day_hours

    by_bus: dict[SeriesId, dict[int, ForecastBundle]] = {}
    for b in bus_forecasts:
        if b.series not in hierarchy.buses:
            raise DataError(f"{b.series} is not a bus of {hierarchy.utility}")
        by_bus.setdefault(b.series, {})[b.origin] = b
    missing = [bus for bus in hierarchy.buses if bus not in by_bus]
    if missing:
        raise DataError(f"missing forecasts for buses {missing}")
    origins = sorted({b.origin for b in bus_forecasts})
    for bus in hierarchy.buses:
        if sorted(by_bus[bus]) != origins:
            raise DataError(f"{bus} does not cover the common origin set")

    utility_by_origin = {}
    if utility_forecasts is not None:
        utility_by_origin = {b.origin: b for b in utility_forecasts}

    hours_all: list[int] = []
    residuals: dict[SeriesId, list[float]] = {bus: [] for bus in hierarchy.buses}
    loads: dict[SeriesId, list[float]] = {bus: [] for bus in hierarchy.buses}
    for origin in origins:
        sample = by_bus[hierarchy.buses[0]][origin]
        hours = (
            eval_hours[origin] if eval_hours is not None else target_day_hours(sample)
        )
        sel = np.isin(sample.hours(), hours)
        if utility_forecasts is not None:
            ub = utility_by_origin.get(origin)
            if ub is None:
                raise DataError(f"no utility bundle at origin {format_hour(origin)}")
            bus_sum = np.sum([by_bus[bus][origin].median() for bus in hierarchy.buses], axis=0)
            if np.max(np.abs(bus_sum - ub.median())) > 1e-6:
                raise DataError(
                    "utility forecast is not the bottom-up sum of the bus forecasts"
                )
        for bus in hierarchy.buses:
            bundle = by_bus[bus][origin]
            series = bus_actuals.get(bus)
            if series is None:
                raise DataError(f"no actuals for {bus}")
            pred = bundle.median()[sel]
            actual = np.array([series.load[series.index_of(int(h))] for h in hours])
            residuals[bus].extend((actual - pred).tolist())
            loads[bus].extend(actual.tolist())
        hours_all.extend(int(h) for h in hours)

    res_arrays = {bus: np.asarray(v) for bus, v in residuals.items()}
    mean_loads = {bus: float(np.mean(v)) for bus, v in loads.items()}
    order = sorted(hierarchy.buses, key=lambda b: -mean_loads[b])
    top = order[: min(top_n, len(order))]
    rest = order[len(top) :]

    rows = []
    for i, hour in enumerate(hours_all):
        bus_res = {bus: float(res_arrays[bus][i]) for bus in top}
        rem = float(np.sum([res_arrays[bus][i] for bus in rest])) if rest else 0.0
        rows.append(
            AttributionRow(
                hour=hour,
                utility_residual=float(np.sum([res_arrays[bus][i] for bus in hierarchy.buses])),
                bus_residuals=bus_res,
                remainder_residual=rem,
            )
        )
    return AttributionResult(rows=rows, top_buses=top, all_residuals=res_arrays, mean_loads=mean_loads)


@dataclass
class HighErrorProfile:
    direction: str  # "positive" or "negative"
    selected_hours: list[int]
    bias_share: dict[SeriesId, float]
    mae_share: dict[SeriesId, float]
    overall_mae_share: dict[SeriesId, float]
    overall_load_share: dict[SeriesId, float]

    def to_json_dict(self) -> dict:
        return {
            "direction": self.direction,
            "denominators": {
                "bias_share": "signed_mean_utility_residual",
                "mae_share": "mean_abs_utility_residual",
            },
            "selected_hours": [format_hour(h) for h in self.selected_hours],
            "buses": {
                s.id: {
                    "bias_share": self.bias_share[s],
                    "mae_share": self.mae_share[s],
                    "overall_mae_share": self.overall_mae_share[s],
                    "overall_load_share": self.overall_load_share[s],
                }
                for s in sorted(self.bias_share)
            },
        }


def high_error_analysis(
    attribution: AttributionResult, quantile: float = 0.10
) -> tuple[HighErrorProfile, HighErrorProfile]:
    """Profiles over the top positive and top negative utility residual deciles.

    Per bus: bias_share = mean bus residual over the selected hours divided
    by the mean utility residual there; mae_share uses absolute values
    with the mean absolute utility residual as denominator. Beyond the
    selection: overall_mae_share is the bus share of summed bus MAE and
    overall_load_share the bus share of summed mean loads.
    """
    rows = attribution.rows
    if len(rows) < 10:
        raise DataError(f"need at least 10 rows for decile selection, got {len(rows)}")
    n_pick = math.ceil(quantile * len(rows))
    util = attribution.utility_residuals()
    hours = np.array([r.hour for r in rows])
    # order by residual, ties broken by timestamp
    pos_order = np.lexsort((hours, -util))
    neg_order = np.lexsort((hours, util))
    pos_idx = pos_order[:n_pick]
    neg_idx = neg_order[:n_pick]

    buses = list(attribution.all_residuals)
    total_mae = sum(float(np.mean(np.abs(attribution.all_residuals[b]))) for b in buses)
    total_load = sum(attribution.mean_loads[b] for b in buses)
    overall_mae_share = {
        b: float(np.mean(np.abs(attribution.all_residuals[b]))) / total_mae for b in buses
    }
    overall_load_share = {b: attribution.mean_loads[b] / total_load for b in buses}

    def profile(idx: np.ndarray, direction: str) -> HighErrorProfile:
        mean_util = float(np.mean(util[idx]))
        mean_abs_util = float(np.mean(np.abs(util[idx])))
        if mean_util == 0:
            raise DataError("zero mean utility residual in the selected hours")
        bias = {
            b: float(np.mean(attribution.all_residuals[b][idx])) / mean_util for b in buses
        }
        mae = {
            b: float(np.mean(np.abs(attribution.all_residuals[b][idx]))) / mean_abs_util
            for b in buses
        }
        return HighErrorProfile(
            direction=direction,
            selected_hours=[int(h) for h in hours[idx]],
            bias_share=bias,
            mae_share=mae,
            overall_mae_share=overall_mae_share,
            overall_load_share=overall_load_share,
        )

    return profile(pos_idx, "positive"), profile(neg_idx, "negative")


def feature_error_profile(
    features: dict[SeriesId, FeatureVector],
    mae: dict[SeriesId, float],
    worst_n: int = 10,
) -> dict:
    """Quartiles of each feature for all buses vs the worst-N by MAE,
    centered on the all-bus median and scaled by the all-bus IQR."""
    buses = sorted(features)
    if len(buses) < worst_n:
        raise DataError(f"need at least worst_n={worst_n} buses, got {len(buses)}")
    worst = sorted(buses, key=lambda b: -mae[b])[:worst_n]
    matrix = np.stack([features[b].as_array() for b in buses])
    worst_matrix = np.stack([features[b].as_array() for b in worst])

    out = {"worst_buses": [b.id for b in worst], "features": {}}
    for j, name in enumerate(FEATURE_NAMES):
        q1, med, q3 = np.percentile(matrix[:, j], [25, 50, 75])
        iqr = q3 - q1
        entry: dict = {"degenerate": iqr == 0}
        if iqr == 0:
            out["features"][name] = entry
            continue

        def scaled(values: np.ndarray) -> dict:
            w1, wm, w3 = np.percentile(values, [25, 50, 75])
            return {
                "q1": float((w1 - med) / iqr),
                "median": float((wm - med) / iqr),
                "q3": float((w3 - med) / iqr),
                "iqr": float((w3 - w1) / iqr),
            }

        entry["all"] = scaled(matrix[:, j])
        entry["worst"] = scaled(worst_matrix[:, j])
        out["features"][name] = entry
    return out
