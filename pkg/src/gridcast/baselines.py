"""sNaive and kNN comparison forecasters.

sNaive repeats the observation from 48 hours before each target hour (the
24h-prior value is not fully available at a 2 PM origin). kNN is day
based: the feature couples the target day's 24 forecast temperatures with
the 24 most recent observed load hours ending at the origin, and the
forecast is the unweighted mean of the k nearest candidate days' load
profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelError
from .series import HOURS_PER_DAY, LoadSeries, day_start, hour_of_day

SNAIVE_LAG = 48
ORIGIN_HOUR_OF_DAY = 14
FIRST_TARGET_STEP = HOURS_PER_DAY - ORIGIN_HOUR_OF_DAY  # 14:00 + 10h = next midnight


def snaive_forecast(history: LoadSeries, origin: int, horizon: int = 33) -> np.ndarray:
    """forecast[h] = observation at origin + h - 48 for h = 1..horizon."""
    io = history.index_of(origin)
    if io + 1 - SNAIVE_LAG < 0:
        raise ModelError(f"{history.series}: need {SNAIVE_LAG}h of history before the origin")
    idx = io + 1 + np.arange(horizon) - SNAIVE_LAG
    values = history.load[idx]
    if np.isnan(values).any():
        raise ModelError(f"{history.series}: missing history inside the sNaive window")
    return values.copy()


@dataclass(frozen=True)
class KnnConfig:
    k: int = 3

    def __post_init__(self):
        if self.k < 1:
            raise ModelError("k must be at least 1")


class KnnForecaster:
    """Candidate days from a training split; queries run at 14:00 origins."""

    def __init__(self, train: LoadSeries, cfg: KnnConfig | None = None):
        self.cfg = cfg or KnnConfig()
        self.series = train.series
        if np.isnan(train.load).any() or np.isnan(train.temperature).any():
            raise ModelError(f"{train.series}: clean the series before fitting kNN")

        feats, profiles = [], []
        first_day = day_start(train.start + 23)  # first full midnight in range
        day = first_day
        while day + HOURS_PER_DAY <= train.end:
            pseudo_origin = day - FIRST_TARGET_STEP  # 14:00 of the prior day
            lag_lo = pseudo_origin - 23
            if lag_lo >= train.start:
                d0 = day - train.start
                o0 = pseudo_origin - train.start
                feats.append(
                    np.concatenate(
                        [train.temperature[d0 : d0 + 24], train.load[o0 - 23 : o0 + 1]]
                    )
                )
                profiles.append(train.load[d0 : d0 + 24].copy())
            day += HOURS_PER_DAY
        if len(feats) < self.cfg.k:
            raise ModelError(
                f"{train.series}: only {len(feats)} candidate days, need k={self.cfg.k}"
            )
        matrix = np.stack(feats)
        self.feat_mean = matrix.mean(axis=0)
        std = matrix.std(axis=0)
        self.feat_std = np.where(std > 0, std, 1.0)
        self.candidates = (matrix - self.feat_mean) / self.feat_std
        self.profiles = np.stack(profiles)

    def predict(self, history: LoadSeries, origin: int, future_day_temps: np.ndarray) -> np.ndarray:
        """24-hour load profile of the day after the origin's compute day."""
        if hour_of_day(origin) != ORIGIN_HOUR_OF_DAY:
            raise ModelError(f"kNN queries run at {ORIGIN_HOUR_OF_DAY}:00 origins")
        temps = np.asarray(future_day_temps, dtype=np.float64)
        if temps.shape != (24,):
            raise ModelError("need the 24 target-day temperatures")
        io = history.index_of(origin)
        if io - 23 < 0:
            raise ModelError(f"{history.series}: need 24h of history before the origin")
        lag = history.load[io - 23 : io + 1]
        query = (np.concatenate([temps, lag]) - self.feat_mean) / self.feat_std
        dists = np.sqrt(np.sum((self.candidates - query) ** 2, axis=1))
        nearest = np.argsort(dists, kind="stable")[: self.cfg.k]
        return self.profiles[nearest].mean(axis=0)


def knn_forecast(
    train: LoadSeries,
    history: LoadSeries,
    origin: int,
    future_day_temps: np.ndarray,
    cfg: KnnConfig | None = None,
) -> np.ndarray:
    """One-shot convenience wrapper around KnnForecaster."""
    return KnnForecaster(train, cfg).predict(history, origin, future_day_temps)
