"""Rolling-window sample construction, data pooling, and the training loop.

Pooling modes: Local fits one bank per series on that series' samples
alone; Global fits one bank whose shared nets see a seeded shuffle of all
series' samples each epoch; GroupedGlobal runs one independent Global fit
per k-means group. Recency weights ramp linearly from 1.0 (oldest origin)
to ``newer_samples_weight`` (newest) within each series.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .clustering import GroupAssignment
from .errors import ModelError
from .model.config import HitsGamConfig
from .model.engine import backward_batch, build_series_data, forward_batch, weighted_pinball
from .model.params import HitsGamParams
from .series import HolidayCalendar, LoadSeries, SeriesId


class PoolingMode(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"
    GROUPED_GLOBAL = "grouped"


@dataclass(frozen=True)
class PoolingSpec:
    mode: PoolingMode
    groups: GroupAssignment | None = None

    def __post_init__(self):
        if self.mode is PoolingMode.GROUPED_GLOBAL and self.groups is None:
            raise ModelError("GroupedGlobal pooling requires a group assignment")


@dataclass
class TrainingSample:
    """One rolling-window origin: scaled lags, targets, and future temps.

    ``lags`` hold the scaled load at the window hours; the model
    residualizes them against its current trend/seasonality/event values,
    so with zero-initialized components the lags are the residuals.
    """

    series: SeriesId
    origin: int
    lags: np.ndarray
    targets: np.ndarray
    future_temps: np.ndarray
    weight: float


def sample_count(n_hours: int, cfg: HitsGamConfig) -> int:
    return n_hours - cfg.n_lags - cfg.horizon + 1


def recency_weights(n_samples: int, newest_weight: float) -> np.ndarray:
    """Linear ramp 1.0 -> newest_weight over the ordered origins."""
    ramp = np.arange(n_samples, dtype=np.float64) / max(n_samples - 1, 1)
    return 1.0 + (newest_weight - 1.0) * ramp


def build_samples(train: LoadSeries, cfg: HitsGamConfig | None = None) -> list[TrainingSample]:
    """Materialize every hourly origin of one training split.

    Reference implementation of the sample stream; the fit loop uses an
    index-based equivalent over the same windows (covered by tests).
    Temperatures are scaled by this series' own statistics, which equals
    the pooled temperature scaler for a single-series pool.
    """
    cfg = cfg or HitsGamConfig()
    n = len(train)
    count = sample_count(n, cfg)
    if count < 1:
        raise ModelError(
            f"{train.series}: too short to build samples "
            f"({n} < {cfg.n_lags + cfg.horizon})"
        )
    if np.isnan(train.load).any():
        raise ModelError(f"{train.series}: clean the series before building samples")
    mean, std = float(train.load.mean()), float(train.load.std())
    if std == 0:
        raise ModelError(f"{train.series}: zero-variance series cannot be standardized")
    t_mean, t_std = float(train.temperature.mean()), float(train.temperature.std())
    t_std = t_std if t_std > 0 else 1.0
    y = (train.load - mean) / std
    temps = (train.temperature - t_mean) / t_std
    weights = recency_weights(count, cfg.newer_samples_weight)

    samples = []
    for i, oidx in enumerate(range(cfg.n_lags - 1, n - cfg.horizon)):
        samples.append(
            TrainingSample(
                series=train.series,
                origin=train.start + oidx,
                lags=y[oidx - cfg.n_lags + 1 : oidx + 1].copy(),
                targets=y[oidx + 1 : oidx + 1 + cfg.horizon].copy(),
                future_temps=temps[oidx + 1 : oidx + 1 + cfg.horizon].copy(),
                weight=float(weights[i]),
            )
        )
    return samples


def default_calendar(pool: list[LoadSeries], cfg: HitsGamConfig) -> HolidayCalendar:
    """U.S. federal calendar spanning the pool plus one forecast horizon."""
    from .series import hour_to_datetime

    first = hour_to_datetime(min(s.start for s in pool)).year
    last = hour_to_datetime(max(s.end for s in pool) + cfg.horizon + 8760).year
    return HolidayCalendar.us_federal(first, last)


class Adam:
    """Adaptive-moment optimizer over a fixed list of parameter arrays."""

    def __init__(self, params: list[np.ndarray], lr: float, b1=0.9, b2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        correct1 = 1.0 - self.b1**self.t
        correct2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


@dataclass
class FitResult:
    params: HitsGamParams
    epoch_losses: list[float]
    mode: PoolingMode
    group: int | None = None

    def covers(self, series: SeriesId) -> bool:
        return series in self.params.series_ids

    def report_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "group": self.group,
            "series": [s.id for s in self.params.series_ids],
            "epoch_losses": self.epoch_losses,
        }


def training_report(results: list[FitResult]) -> dict:
    """Epoch-level loss curves for every fitted bank."""
    return {"fits": [r.report_dict() for r in results]}


def _fit_single(
    pool: list[LoadSeries],
    cfg: HitsGamConfig,
    seed: int,
    calendar: HolidayCalendar,
) -> FitResult:
    for s in pool:
        if sample_count(len(s), cfg) < 1:
            raise ModelError(f"{s.series}: too short to train on")
        if np.isnan(s.load).any() or np.isnan(s.temperature).any():
            raise ModelError(f"{s.series}: clean the series before training")

    load_mean = np.array([s.load.mean() for s in pool])
    load_std = np.array([s.load.std() for s in pool])
    if np.any(load_std == 0):
        bad = pool[int(np.argmax(load_std == 0))].series
        raise ModelError(f"{bad}: zero-variance series cannot be standardized")
    all_temps = np.concatenate([s.temperature for s in pool])
    temp_std = float(all_temps.std())

    params = HitsGamParams.initialize(
        cfg=cfg,
        seed=seed,
        series_ids=[s.series for s in pool],
        load_mean=load_mean,
        load_std=load_std,
        train_start=np.array([s.start for s in pool]),
        train_len=np.array([len(s) for s in pool]),
        temp_mean=float(all_temps.mean()),
        temp_std=temp_std if temp_std > 0 else 1.0,
        calendar=calendar,
    )
    data = build_series_data(params, pool)

    didx_parts, oidx_parts, weight_parts = [], [], []
    for d, s in enumerate(pool):
        count = sample_count(len(s), cfg)
        didx_parts.append(np.full(count, d, dtype=np.int64))
        oidx_parts.append(np.arange(cfg.n_lags - 1, len(s) - cfg.horizon, dtype=np.int64))
        weight_parts.append(recency_weights(count, cfg.newer_samples_weight))
    didx = np.concatenate(didx_parts)
    oidx = np.concatenate(oidx_parts)
    weights = np.concatenate(weight_parts)
    n_samples = len(didx)

    tensors = (
        [params.trend_m, params.trend_k, params.seas_coef, params.event_coef]
        + params.ar_net.parameters()
        + params.temp_net.parameters()
    )
    rng = np.random.default_rng(seed)
    opt = Adam(tensors, lr=cfg.learning_rate)

    epoch_losses = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n_samples)
        total, seen = 0.0, 0
        for lo in range(0, n_samples, cfg.batch_size):
            take = perm[lo : lo + cfg.batch_size]
            cache = forward_batch(params, data, didx[take], oidx[take])
            loss, dpred = weighted_pinball(params, cache, weights[take])
            g = backward_batch(params, data, cache, dpred)
            grads = (
                [g.trend_m, g.trend_k, g.seas, g.events]
                + g.ar_w
                + g.ar_b
                + g.temp_w
                + g.temp_b
            )
            opt.step(grads)
            total += loss * len(take)
            seen += len(take)
        epoch_losses.append(total / seen)
    return FitResult(params=params, epoch_losses=epoch_losses, mode=PoolingMode.GLOBAL)


def fit(
    pool: list[LoadSeries],
    spec: PoolingSpec,
    cfg: HitsGamConfig | None = None,
    seed: int = 0,
    calendar: HolidayCalendar | None = None,
) -> list[FitResult]:
    """Fit parameter banks per the pooling mode (see module docstring)."""
    cfg = cfg or HitsGamConfig()
    if not pool:
        raise ModelError("cannot fit on an empty pool")
    if calendar is None:
        calendar = default_calendar(pool, cfg)

    if spec.mode is PoolingMode.LOCAL:
        results = []
        for s in pool:
            r = _fit_single([s], cfg, seed, calendar)
            results.append(FitResult(r.params, r.epoch_losses, PoolingMode.LOCAL))
        return results

    if spec.mode is PoolingMode.GLOBAL:
        return [_fit_single(pool, cfg, seed, calendar)]

    groups = spec.groups
    missing = [s.series for s in pool if s.series not in groups.groups]
    if missing:
        raise ModelError(f"series without a group assignment: {missing}")
    results = []
    for g in range(groups.k):
        members = [s for s in pool if groups.groups[s.series] == g]
        if not members:
            continue
        r = _fit_single(members, cfg, seed, calendar)
        results.append(FitResult(r.params, r.epoch_losses, PoolingMode.GROUPED_GLOBAL, group=g))
    return results
