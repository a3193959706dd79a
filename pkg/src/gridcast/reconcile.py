"""Hierarchical reconciliation between utility and bus forecasts.

Top-down splits a utility bundle by the hierarchy's historical
proportions; bottom-up sums bus bundles into a utility bundle. Summed
quantile rows are reported but flagged (`interval_method: summed`): the
sum of per-bus q-quantiles is not the q-quantile of the sum.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .hierarchy import Hierarchy
from .model.forecast import COMPONENT_NAMES, ForecastBundle


def top_down(utility_forecast: ForecastBundle, h: Hierarchy) -> list[ForecastBundle]:
    """Per-bus bundles: proportion * utility value per hour and quantile."""
    if utility_forecast.series != h.utility:
        raise DataError(f"{utility_forecast.series} is not the hierarchy utility {h.utility}")
    out = []
    for bus, prop in zip(h.buses, h.proportions):
        components = None
        if utility_forecast.components is not None:
            components = {k: prop * v for k, v in utility_forecast.components.items()}
        out.append(
            utility_forecast.copy_with(
                series=bus,
                forecast=prop * utility_forecast.forecast,
                components=components,
                reconciliation="top_down",
            )
        )
    return out


def _check_common(bundles: list[ForecastBundle]) -> None:
    origins = {b.origin for b in bundles}
    horizons = {(b.horizon, b.step_offset) for b in bundles}
    quantiles = {b.quantiles for b in bundles}
    if len(origins) != 1 or len(horizons) != 1 or len(quantiles) != 1:
        raise DataError("bundles must share origin, horizon, and quantiles to aggregate")


def bottom_up(bus_forecasts: list[ForecastBundle], h: Hierarchy) -> ForecastBundle:
    """Utility bundle: per-hour, per-quantile, and per-component sums."""
    by_series = {b.series: b for b in bus_forecasts}
    missing = [bus for bus in h.buses if bus not in by_series]
    if missing:
        raise DataError(f"missing bus forecasts for {missing}")
    members = [by_series[bus] for bus in h.buses]
    _check_common(members)
    forecast = np.sum([b.forecast for b in members], axis=0)
    components = None
    if all(b.components is not None for b in members):
        components = {
            k: np.sum([b.components[k] for b in members], axis=0) for k in COMPONENT_NAMES
        }
    return members[0].copy_with(
        series=h.utility,
        forecast=forecast,
        components=components,
        interval_method="summed",
        reconciliation="bottom_up",
    )


def scale_to_utility(agg: ForecastBundle, h: Hierarchy) -> ForecastBundle:
    """Scale an aggregated-bus bundle by the historical utility/bus ratio."""
    components = None
    if agg.components is not None:
        components = {k: h.agg_scale * v for k, v in agg.components.items()}
    return agg.copy_with(
        forecast=h.agg_scale * agg.forecast,
        components=components,
        reconciliation="bottom_up_scaled",
    )
