"""Forecast bundles: per-quantile forecasts with component decomposition.

The decomposition is reported in MW for the median quantile: trend absorbs
the scaler mean so the five components sum exactly to the forecast. When
the per-hour sorting repair moves another quantile's value into the median
slot, the AR and temperature entries at that hour follow it, keeping the
additivity invariant exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import ModelError
from ..series import Level, LoadSeries, SeriesId, format_hour, parse_hour
from .engine import SeriesData, build_series_data, forward_batch
from .params import HitsGamParams

COMPONENT_NAMES = ("trend", "seasonality", "events", "autoregression", "temperature")

ADDITIVITY_TOL = 1e-6


class ForecastBundle:
    """One origin's horizon forecast for one series.

    ``forecast`` has shape (n_quantiles, horizon) in MW with per-hour
    non-decreasing quantiles; ``components`` maps the five component names
    to (horizon,) MW vectors for the median quantile. Step ``i`` covers the
    hour ``origin + step_offset + i``.
    """

    def __init__(
        self,
        series: SeriesId,
        origin: int,
        quantiles: tuple[float, ...],
        forecast: np.ndarray,
        components: dict[str, np.ndarray] | None,
        step_offset: int = 1,
        interval_method: str = "direct",
        reconciliation: str = "none",
    ):
        self.series = series
        self.origin = int(origin)
        self.quantiles = tuple(float(q) for q in quantiles)
        self.forecast = np.asarray(forecast, dtype=np.float64)
        self.components = (
            None
            if components is None
            else {k: np.asarray(v, dtype=np.float64) for k, v in components.items()}
        )
        self.step_offset = int(step_offset)
        self.interval_method = interval_method
        self.reconciliation = reconciliation
        self.validate()

    @property
    def horizon(self) -> int:
        return self.forecast.shape[1]

    @property
    def median_index(self) -> int:
        return self.quantiles.index(0.5)

    def median(self) -> np.ndarray:
        return self.forecast[self.median_index]

    def hours(self) -> np.ndarray:
        return self.origin + self.step_offset + np.arange(self.horizon, dtype=np.int64)

    def quantile_row(self, q: float) -> np.ndarray:
        try:
            return self.forecast[self.quantiles.index(q)]
        except ValueError:
            raise ModelError(f"quantile {q} not in bundle") from None

    def validate(self) -> None:
        if 0.5 not in self.quantiles:
            raise ModelError("bundle must contain the median quantile")
        if self.forecast.shape[0] != len(self.quantiles):
            raise ModelError("one forecast row per quantile required")
        if np.any(np.diff(self.forecast, axis=0) < -ADDITIVITY_TOL):
            raise ModelError("quantile rows must be non-decreasing per hour")
        if self.components is not None:
            if set(self.components) != set(COMPONENT_NAMES):
                raise ModelError(f"components must be exactly {COMPONENT_NAMES}")
            total = np.sum([self.components[k] for k in COMPONENT_NAMES], axis=0)
            gap = np.max(np.abs(total - self.median()))
            if gap > ADDITIVITY_TOL:
                raise ModelError(f"components do not sum to the median forecast (gap {gap:.2e} MW)")

    def copy_with(self, **updates) -> "ForecastBundle":
        kwargs = dict(
            series=self.series,
            origin=self.origin,
            quantiles=self.quantiles,
            forecast=self.forecast.copy(),
            components=None
            if self.components is None
            else {k: v.copy() for k, v in self.components.items()},
            step_offset=self.step_offset,
            interval_method=self.interval_method,
            reconciliation=self.reconciliation,
        )
        kwargs.update(updates)
        return ForecastBundle(**kwargs)

    def to_json_dict(self) -> dict:
        return {
            "series_id": self.series.id,
            "level": self.series.level.value,
            "origin": format_hour(self.origin),
            "quantiles": list(self.quantiles),
            "step_offset": self.step_offset,
            "forecast": [row.tolist() for row in self.forecast],
            "components": None
            if self.components is None
            else {k: v.tolist() for k, v in self.components.items()},
            "interval_method": self.interval_method,
            "reconciliation": self.reconciliation,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ForecastBundle":
        return cls(
            series=SeriesId(d["series_id"], Level(d["level"])),
            origin=parse_hour(d["origin"]),
            quantiles=tuple(d["quantiles"]),
            forecast=np.asarray(d["forecast"], dtype=np.float64),
            components=None
            if d["components"] is None
            else {k: np.asarray(v, dtype=np.float64) for k, v in d["components"].items()},
            step_offset=d["step_offset"],
            interval_method=d["interval_method"],
            reconciliation=d["reconciliation"],
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ForecastBundle):
            return NotImplemented
        return self.to_json_dict() == other.to_json_dict()


def _assemble_bundle(
    params: HitsGamParams,
    series: SeriesId,
    origin: int,
    base_tgt: np.ndarray,
    ar_out: np.ndarray,
    temp_out: np.ndarray,
    trend_tgt: np.ndarray,
    events_tgt: np.ndarray,
) -> ForecastBundle:
    cfg = params.config
    row = params.row(series)
    mean, std = params.load_mean[row], params.load_std[row]

    pred_scaled = base_tgt[None, :] + ar_out + temp_out
    pred_mw = pred_scaled * std + mean
    order = np.argsort(pred_mw, axis=0, kind="stable")
    sorted_mw = np.take_along_axis(pred_mw, order, axis=0)

    # components follow whichever raw quantile landed in the median slot
    src = order[cfg.median_index]
    h_idx = np.arange(cfg.horizon)
    seas_tgt = base_tgt - trend_tgt - events_tgt
    components = {
        "trend": trend_tgt * std + mean,
        "seasonality": seas_tgt * std,
        "events": events_tgt * std,
        "autoregression": ar_out[src, h_idx] * std,
        "temperature": temp_out[src, h_idx] * std,
    }
    return ForecastBundle(
        series=series,
        origin=origin,
        quantiles=cfg.quantiles,
        forecast=sorted_mw,
        components=components,
    )


def forecast(
    params: HitsGamParams,
    series: SeriesId,
    origin: int,
    history: LoadSeries,
    future_temps: np.ndarray,
) -> ForecastBundle:
    """Day-ahead bundle for one series at one origin.

    ``history`` must cover the ``n_lags`` hours ending at the origin;
    ``future_temps`` are the raw forecast temperatures for the horizon.
    """
    return forecast_many(params, [(series, origin, history, future_temps)])[0]


def forecast_many(
    params: HitsGamParams,
    requests: list[tuple[SeriesId, int, LoadSeries, np.ndarray]],
    data: SeriesData | None = None,
) -> list[ForecastBundle]:
    """Vectorized forecasting across (series, origin, history, temps) requests.

    A prebuilt ``SeriesData`` (covering every request's history and target
    hours) skips per-call scaling and feature building; histories in the
    requests are then only consulted for index arithmetic.
    """
    cfg = params.config
    if not requests:
        return []
    histories = [r[2] for r in requests]
    for (series, origin, history, temps), h in zip(requests, histories):
        if history.series != series:
            raise ModelError(f"history series {history.series} does not match {series}")
        if origin - (cfg.n_lags - 1) < h.start or origin >= h.end:
            raise ModelError(
                f"{series}: need {cfg.n_lags} history hours ending at the origin"
            )
        temps = np.asarray(temps)
        if temps.shape != (cfg.horizon,):
            raise ModelError(f"{series}: need {cfg.horizon} future temperatures")

    if data is None:
        data = build_series_data(params, histories, pad_hours=cfg.horizon + 1)
        didx = np.arange(len(requests), dtype=np.int64)
    else:
        by_row = {int(r): i for i, r in enumerate(data.params_row)}
        didx = np.array([by_row[params.row(r[0])] for r in requests], dtype=np.int64)

    oidx = np.array(
        [origin - data.start_hour[d] for (_, origin, _, _), d in zip(requests, didx)],
        dtype=np.int64,
    )
    temp_in = np.stack(
        [(np.asarray(r[3], dtype=np.float64) - params.temp_mean) / params.temp_std for r in requests]
    )
    cache = forward_batch(params, data, didx, oidx, temp_in=temp_in, with_targets=False)

    L = cfg.n_lags
    bundles = []
    for b, (series, origin, _, _) in enumerate(requests):
        prow = np.array([params.row(series)])
        rows_tgt = cache.rows[b, L:]
        hours_tgt = data.feats.start + rows_tgt
        trend_tgt = params.trend_values(prow, hours_tgt[None, :])[0]
        events_tgt = (
            data.feats.holidays[rows_tgt] @ params.event_coef[prow[0]]
            if params.event_coef.shape[1]
            else np.zeros(cfg.horizon)
        )
        bundles.append(
            _assemble_bundle(
                params,
                series,
                origin,
                base_tgt=cache.base[b, L:],
                ar_out=cache.ar_out[b],
                temp_out=cache.temp_out[b],
                trend_tgt=trend_tgt,
                events_tgt=events_tgt,
            )
        )
    return bundles
