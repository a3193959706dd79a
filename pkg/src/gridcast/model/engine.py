"""Batched forward and backward passes of the full additive model.

One training window spans ``n_lags`` history hours plus ``horizon`` target
hours. The interpretable base (trend + seasonality + events) enters twice:
subtracted from the scaled load to form the AR net's residual input, and
added to the net outputs at the target hours. Gradients therefore flow
into the local banks both directly and through the AR net's input, which
is exactly what joint fitting means here.

Batches mix series, so the seasonal/event contribution is computed as one
projection of the shared time-feature design onto every series'
coefficients (a single matrix product per step); per-sample windows then
gather scalars from that projection instead of wide feature rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from ..series import LoadSeries
from .components import TimeFeatureCache
from .params import HitsGamParams


@dataclass
class SeriesData:
    """Scaled series arrays flattened for cross-series batch gathers."""

    params_row: np.ndarray  # (D,) parameter-bank row per data series
    flat_load: np.ndarray
    flat_temp: np.ndarray
    offset: np.ndarray  # (D,) start of each series inside the flat arrays
    start_hour: np.ndarray  # (D,) epoch hour of each series' first sample
    grid_row0: np.ndarray  # (D,) feature-cache row of each series' first sample
    length: np.ndarray  # (D,)
    feats: TimeFeatureCache

    @property
    def n_series(self) -> int:
        return len(self.offset)


def build_series_data(
    params: HitsGamParams, series_list: list[LoadSeries], pad_hours: int = 0
) -> SeriesData:
    """Scale and flatten series; the feature cache covers every hour plus padding."""
    rows, loads, temps, offsets, starts, lengths = [], [], [], [], [], []
    pos = 0
    for s in series_list:
        row = params.row(s.series)
        if np.isnan(s.load).any() or np.isnan(s.temperature).any():
            raise ModelError(f"{s.series}: series must be cleaned before modeling")
        rows.append(row)
        loads.append((s.load - params.load_mean[row]) / params.load_std[row])
        temps.append((s.temperature - params.temp_mean) / params.temp_std)
        offsets.append(pos)
        starts.append(s.start)
        lengths.append(len(s))
        pos += len(s)
    lo = min(starts)
    hi = max(st + ln for st, ln in zip(starts, lengths)) + pad_hours
    feats = TimeFeatureCache(lo, hi - lo, params.config, params.calendar, params.holiday_names)
    return SeriesData(
        params_row=np.asarray(rows, dtype=np.int64),
        flat_load=np.concatenate(loads),
        flat_temp=np.concatenate(temps),
        offset=np.asarray(offsets, dtype=np.int64),
        start_hour=np.asarray(starts, dtype=np.int64),
        grid_row0=np.asarray(starts, dtype=np.int64) - feats.start,
        length=np.asarray(lengths, dtype=np.int64),
        feats=feats,
    )


@dataclass
class BatchCache:
    didx: np.ndarray  # (B,)
    prow: np.ndarray  # (B,)
    rows: np.ndarray  # (B, T) feature-cache rows, lags then targets
    t_norm: np.ndarray  # (B, T)
    base: np.ndarray  # (B, T) scaled
    resid_in: np.ndarray  # (B, n_lags)
    ar_cache: list
    temp_cache: list
    ar_out: np.ndarray  # (B, Q, H)
    temp_out: np.ndarray  # (B, Q, H)
    pred: np.ndarray  # (B, Q, H) scaled
    targets: np.ndarray | None  # (B, H) scaled


@dataclass
class Gradients:
    trend_m: np.ndarray
    trend_k: np.ndarray
    seas: np.ndarray
    events: np.ndarray
    ar_w: list
    ar_b: list
    temp_w: list
    temp_b: list


def _wide_coefs(params: HitsGamParams) -> np.ndarray:
    return np.concatenate([params.seas_coef, params.event_coef], axis=1)


def forward_batch(
    params: HitsGamParams,
    data: SeriesData,
    didx: np.ndarray,
    oidx: np.ndarray,
    temp_in: np.ndarray | None = None,
    with_targets: bool = True,
) -> BatchCache:
    """Run the model over windows anchored at each (series, origin index).

    ``oidx`` is the index of the origin hour inside each series' array; the
    lag window is the ``n_lags`` hours ending at the origin, targets are
    the following ``horizon`` hours. ``temp_in`` overrides the scaled
    future-temperature matrix (used at inference). Changepoints are inert
    (the config pins them to zero), so the trend is m + k * t_norm here.
    """
    cfg = params.config
    L, H, Q = cfg.n_lags, cfg.horizon, cfg.n_quantiles
    prow = data.params_row[didx]
    rel = np.arange(-(L - 1), H + 1, dtype=np.int64)
    pos = oidx[:, None] + rel[None, :]
    flat = data.offset[didx][:, None] + pos
    rows = data.grid_row0[didx][:, None] + pos
    if rows.min() < 0 or rows.max() >= data.feats.n_hours:
        raise ModelError("window leaves the feature cache range")

    # one projection of the time design onto every data series' coefficients
    proj = data.feats.design @ _wide_coefs(params)[data.params_row].T  # (n_rows, D)
    hours = data.feats.start + rows
    t_norm = (hours - params.train_start[prow][:, None]) / params.train_len[prow][:, None]
    base = (
        params.trend_m[prow][:, None]
        + params.trend_k[prow][:, None] * t_norm
        + proj[rows, didx[:, None]]
    )

    y_lag = data.flat_load[flat[:, :L]]
    resid_in = y_lag - base[:, :L]
    ar_flat, ar_cache = params.ar_net.forward(resid_in)
    ar_out = ar_flat.reshape(-1, Q, H)

    if temp_in is None:
        temp_in = data.flat_temp[flat[:, L:]]
    temp_flat, temp_cache = params.temp_net.forward(temp_in)
    temp_out = temp_flat.reshape(-1, Q, H)

    pred = base[:, None, L:] + ar_out + temp_out
    targets = data.flat_load[flat[:, L:]] if with_targets else None
    return BatchCache(
        didx=didx,
        prow=prow,
        rows=rows,
        t_norm=t_norm,
        base=base,
        resid_in=resid_in,
        ar_cache=ar_cache,
        temp_cache=temp_cache,
        ar_out=ar_out,
        temp_out=temp_out,
        pred=pred,
        targets=targets,
    )


def weighted_pinball(
    params: HitsGamParams, cache: BatchCache, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """(loss, d loss / d pred): mean over samples, horizon steps, and
    quantiles, each sample's terms multiplied by its recency weight; the
    denominator is the plain element count."""
    cfg = params.config
    qv = np.asarray(cfg.quantiles)[None, :, None]
    B = len(cache.pred)
    denom = B * cfg.n_quantiles * cfg.horizon
    diff = cache.targets[:, None, :] - cache.pred
    under = diff >= 0
    terms = np.where(under, qv * diff, (qv - 1.0) * diff)
    w = weights[:, None, None]
    loss = float((w * terms).sum() / denom)
    dpred = np.where(under, -qv, 1.0 - qv) * (w / denom)
    return loss, dpred


def backward_batch(
    params: HitsGamParams, data: SeriesData, cache: BatchCache, dpred: np.ndarray
) -> Gradients:
    """Exact gradients of a scalar with given d/d(pred) for every bank."""
    cfg = params.config
    L, H, Q = cfg.n_lags, cfg.horizon, cfg.n_quantiles
    B = len(dpred)
    dflat = dpred.reshape(B, Q * H)

    d_resid, ar_w, ar_b = params.ar_net.backward(cache.ar_cache, dflat)
    _, temp_w, temp_b = params.temp_net.backward(cache.temp_cache, dflat)

    # base gradient: direct at target hours, minus the residual path at lags
    dbase = np.empty_like(cache.base)
    dbase[:, :L] = -d_resid
    dbase[:, L:] = dpred.sum(axis=1)

    S = params.n_series
    D = data.n_series
    dm = np.bincount(cache.prow, weights=dbase.sum(axis=1), minlength=S)
    dk = np.bincount(cache.prow, weights=(dbase * cache.t_norm).sum(axis=1), minlength=S)

    # scatter d(base)/d(projection) onto (cache row, data series), then one
    # matmul against the design recovers the wide-coefficient gradient
    lin = cache.rows * D + cache.didx[:, None]
    dproj = np.bincount(
        lin.ravel(), weights=dbase.ravel(), minlength=data.feats.n_hours * D
    ).reshape(data.feats.n_hours, D)
    dwide_data = dproj.T @ data.feats.design  # (D, K + n_holidays)
    n_seas = params.seas_coef.shape[1]
    dwide = np.zeros((S, dwide_data.shape[1]))
    np.add.at(dwide, data.params_row, dwide_data)

    return Gradients(
        trend_m=dm,
        trend_k=dk,
        seas=dwide[:, :n_seas],
        events=dwide[:, n_seas:],
        ar_w=ar_w,
        ar_b=ar_b,
        temp_w=temp_w,
        temp_b=temp_b,
    )


# ------------------------------------------------------------ spec surfaces


def ar_forward(params: HitsGamParams, lag_window: np.ndarray) -> np.ndarray:
    """(n_quantiles, horizon) output for one window of scaled residuals."""
    cfg = params.config
    window = np.asarray(lag_window, dtype=np.float64)
    if window.shape != (cfg.n_lags,):
        raise ModelError(f"lag window must have length {cfg.n_lags}, got {window.shape}")
    out, _ = params.ar_net.forward(window[None, :])
    return out.reshape(cfg.n_quantiles, cfg.horizon)


def temperature_forward(params: HitsGamParams, future_temps: np.ndarray) -> np.ndarray:
    """(n_quantiles, horizon) output for raw future temperatures in deg F."""
    cfg = params.config
    temps = np.asarray(future_temps, dtype=np.float64)
    if temps.shape != (cfg.horizon,):
        raise ModelError(f"need {cfg.horizon} future temperatures, got {temps.shape}")
    scaled = (temps - params.temp_mean) / params.temp_std
    out, _ = params.temp_net.forward(scaled[None, :])
    return out.reshape(cfg.n_quantiles, cfg.horizon)


def batch_loss(params: HitsGamParams, samples: list, weights: np.ndarray | None = None) -> float:
    """Mean weighted pinball loss over materialized training samples."""
    from .loss import pinball_terms

    if not samples:
        raise ModelError("batch_loss requires a non-empty batch")
    cfg = params.config
    L, H = cfg.n_lags, cfg.horizon
    qv = np.asarray(cfg.quantiles)
    if weights is None:
        weights = np.array([s.weight for s in samples])
    else:
        weights = np.asarray(weights, dtype=np.float64)

    prow = np.array([params.row(s.series) for s in samples])
    rel = np.arange(-(L - 1), H + 1, dtype=np.int64)
    hours = np.array([s.origin for s in samples], dtype=np.int64)[:, None] + rel[None, :]
    f_seas, f_events = params.local_design(hours.ravel())
    f_seas = f_seas.reshape(hours.shape + (-1,))
    f_events = f_events.reshape(hours.shape + (-1,))
    t_norm = (hours - params.train_start[prow][:, None]) / params.train_len[prow][:, None]
    base = (
        params.trend_m[prow][:, None]
        + params.trend_k[prow][:, None] * t_norm
        + np.einsum("btk,bk->bt", f_seas, params.seas_coef[prow])
    )
    if f_events.shape[-1]:
        base = base + np.einsum("bth,bh->bt", f_events, params.event_coef[prow])

    lags = np.stack([s.lags for s in samples])
    ar_out, _ = params.ar_net.forward(lags - base[:, :L])
    temp_out, _ = params.temp_net.forward(np.stack([s.future_temps for s in samples]))
    pred = (
        base[:, None, L:]
        + ar_out.reshape(-1, cfg.n_quantiles, H)
        + temp_out.reshape(-1, cfg.n_quantiles, H)
    )
    targets = np.stack([s.targets for s in samples])
    terms = pinball_terms(targets, pred, qv)
    denom = len(samples) * cfg.n_quantiles * H
    return float((weights[:, None, None] * terms).sum() / denom)
