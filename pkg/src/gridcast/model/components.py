"""Time features for the interpretable components.

Fourier terms for yearly (8766h), weekly (168h), and conditional daily
(24h, split into summer and winter blocks) seasonality, plus holiday
indicator columns. Features depend only on the absolute timestamp, so one
cache row serves every series at that hour.
"""

from __future__ import annotations

import numpy as np

from ..series import HolidayCalendar, hour_to_datetime
from .config import (
    DAILY_PERIOD_HOURS,
    SUMMER_MONTHS,
    WEEKLY_PERIOD_HOURS,
    YEARLY_PERIOD_HOURS,
    HitsGamConfig,
)


def fourier_features(t_hours, period: float, order: int) -> np.ndarray:
    """[sin(2*pi*j*t/period), cos(...)] for j = 1..order, interleaved.

    ``t_hours`` are hours since the epoch reference; scalars give a
    (2*order,) vector, arrays a (..., 2*order) stack.
    """
    t = np.asarray(t_hours, dtype=np.float64)
    tau = np.mod(t, period)
    j = np.arange(1, order + 1, dtype=np.float64)
    angle = 2.0 * np.pi * tau[..., None] * j / period
    out = np.empty(t.shape + (2 * order,))
    out[..., 0::2] = np.sin(angle)
    out[..., 1::2] = np.cos(angle)
    return out


def summer_mask(hours: np.ndarray) -> np.ndarray:
    """1.0 for hours in April-September, else 0.0."""
    hours = np.asarray(hours, dtype=np.int64)
    months = np.array([hour_to_datetime(int(h)).month for h in np.ravel(hours)])
    mask = np.isin(months, SUMMER_MONTHS).astype(np.float64)
    return mask.reshape(hours.shape)


def seasonal_design_row(hours, cfg: HitsGamConfig) -> np.ndarray:
    """Seasonal feature matrix for given epoch hours.

    Column layout: yearly (2*yearly_order) | weekly (2*weekly_order) |
    daily summer block | daily winter block, with the daily blocks gated
    by the month's summer indicator.
    """
    hours = np.atleast_1d(np.asarray(hours, dtype=np.int64))
    yearly = fourier_features(hours, YEARLY_PERIOD_HOURS, cfg.yearly_order)
    weekly = fourier_features(hours, WEEKLY_PERIOD_HOURS, cfg.weekly_order)
    daily = fourier_features(hours, DAILY_PERIOD_HOURS, cfg.daily_order)
    summer = summer_mask(hours)[..., None]
    return np.concatenate([yearly, weekly, daily * summer, daily * (1.0 - summer)], axis=-1)


class TimeFeatureCache:
    """Seasonal and holiday features precomputed over one hour range.

    Rows cover [start, start + n) epoch hours; row lookup is a plain
    subtraction, so batched gathers stay cheap during training.
    """

    def __init__(
        self,
        start: int,
        n_hours: int,
        cfg: HitsGamConfig,
        calendar: HolidayCalendar,
        holiday_names: tuple[str, ...],
    ):
        self.start = int(start)
        self.n_hours = int(n_hours)
        hours = self.start + np.arange(self.n_hours, dtype=np.int64)
        self.seasonal = seasonal_design_row(hours, cfg)
        self.holidays = calendar.indicator_for_hours(hours, holiday_names)
        # combined design so one projection covers seasonality and events
        self.design = np.concatenate([self.seasonal, self.holidays], axis=1)

    def rows(self, hours: np.ndarray) -> np.ndarray:
        rows = np.asarray(hours, dtype=np.int64) - self.start
        if rows.min() < 0 or rows.max() >= self.n_hours:
            raise IndexError("hour outside feature cache range")
        return rows
