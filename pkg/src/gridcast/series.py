"""Domain types for hourly load series and the time grid they live on.

Timestamps are stored as integer hours since 1970-01-01T00:00 in one fixed
offset (no DST transitions), which keeps the hourly grid gapless and makes
grid arithmetic exact. Missing observations are NaN markers inside the
arrays, never absent rows.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DataError

EPOCH = dt.datetime(1970, 1, 1)
HOURS_PER_DAY = 24
HOURS_PER_WEEK = 168


class Level(str, Enum):
    UTILITY = "utility"
    BUS = "bus"


def parse_hour(text: str) -> int:
    """Parse ``YYYY-MM-DDTHH:00:00`` (or a date) into epoch hours."""
    try:
        stamp = dt.datetime.fromisoformat(text.strip())
    except ValueError as exc:
        raise DataError(f"malformed timestamp {text!r}") from exc
    if stamp.tzinfo is not None:
        raise DataError(f"timestamp {text!r} carries a timezone; grid is fixed-offset naive")
    if stamp.minute or stamp.second or stamp.microsecond:
        raise DataError(f"timestamp {text!r} is not aligned to the hourly grid")
    return datetime_to_hour(stamp)


def format_hour(hour: int) -> str:
    return hour_to_datetime(hour).strftime("%Y-%m-%dT%H:00:00")


def hour_to_datetime(hour: int) -> dt.datetime:
    return EPOCH + dt.timedelta(hours=int(hour))


def datetime_to_hour(stamp: dt.datetime) -> int:
    delta = stamp - EPOCH
    return delta.days * 24 + delta.seconds // 3600


def date_of(hour: int) -> dt.date:
    return hour_to_datetime(hour).date()


def hour_of_day(hour: int) -> int:
    return int(hour) % 24


def month_of(hour: int) -> int:
    return hour_to_datetime(hour).month


def day_start(hour: int) -> int:
    """Epoch hour of midnight of the day containing ``hour``."""
    return int(hour) - hour_of_day(hour)


@dataclass(frozen=True, order=True)
class SeriesId:
    id: str
    level: Level

    def __post_init__(self):
        if not self.id:
            raise DataError("series id must be non-empty")

    def __str__(self) -> str:
        return f"{self.level.value}:{self.id}"


@dataclass
class LoadSeries:
    """One hourly net-load series with an aligned temperature covariate.

    ``load`` is in MW, ``temperature`` in degrees F; both are float64 arrays
    of equal length on a gapless hourly grid starting at ``start`` (epoch
    hours). Future hours may carry forecast temperatures.
    """

    series: SeriesId
    start: int
    load: np.ndarray
    temperature: np.ndarray

    def __post_init__(self):
        self.load = np.asarray(self.load, dtype=np.float64)
        self.temperature = np.asarray(self.temperature, dtype=np.float64)
        if self.load.ndim != 1 or self.temperature.ndim != 1:
            raise DataError("load and temperature must be 1-d")
        if len(self.load) != len(self.temperature):
            raise DataError(
                f"{self.series}: load ({len(self.load)}) and temperature "
                f"({len(self.temperature)}) lengths differ"
            )

    def __len__(self) -> int:
        return len(self.load)

    @property
    def end(self) -> int:
        """First epoch hour past the series (exclusive)."""
        return self.start + len(self.load)

    def hours(self) -> np.ndarray:
        return self.start + np.arange(len(self.load), dtype=np.int64)

    def index_of(self, hour: int) -> int:
        if not self.start <= hour < self.end:
            raise DataError(f"{self.series}: hour {format_hour(hour)} outside series range")
        return int(hour - self.start)

    def slice_hours(self, start: int, end: int) -> "LoadSeries":
        """Sub-series covering [start, end) epoch hours."""
        i, j = self.index_of(start), int(end - self.start)
        if not i < j <= len(self.load):
            raise DataError(f"{self.series}: invalid slice [{start}, {end})")
        return replace(self, start=start, load=self.load[i:j].copy(), temperature=self.temperature[i:j].copy())

    def n_missing(self) -> int:
        return int(np.isnan(self.load).sum())


def _nth_weekday(year: int, month: int, weekday: int, n: int) -> dt.date:
    first = dt.date(year, month, 1)
    offset = (weekday - first.weekday()) % 7
    return first + dt.timedelta(days=offset + 7 * (n - 1))


def _last_weekday(year: int, month: int, weekday: int) -> dt.date:
    next_month = dt.date(year + month // 12, month % 12 + 1, 1)
    last = next_month - dt.timedelta(days=1)
    return last - dt.timedelta(days=(last.weekday() - weekday) % 7)


US_HOLIDAY_NAMES = (
    "new_years_day",
    "mlk_day",
    "presidents_day",
    "memorial_day",
    "independence_day",
    "labor_day",
    "columbus_day",
    "veterans_day",
    "thanksgiving",
    "christmas",
)


def _us_federal_dates(year: int) -> list[tuple[dt.date, str]]:
    return [
        (dt.date(year, 1, 1), "new_years_day"),
        (_nth_weekday(year, 1, 0, 3), "mlk_day"),
        (_nth_weekday(year, 2, 0, 3), "presidents_day"),
        (_last_weekday(year, 5, 0), "memorial_day"),
        (dt.date(year, 7, 4), "independence_day"),
        (_nth_weekday(year, 9, 0, 1), "labor_day"),
        (_nth_weekday(year, 10, 0, 2), "columbus_day"),
        (dt.date(year, 11, 11), "veterans_day"),
        (_nth_weekday(year, 11, 3, 4), "thanksgiving"),
        (dt.date(year, 12, 25), "christmas"),
    ]


@dataclass(frozen=True)
class HolidayCalendar:
    """Set of (date, holiday-name) pairs.

    The shipped U.S. calendar places at most one holiday per date; custom
    calendars may stack several names on one date, in which case event
    effects add up.
    """

    holidays: tuple[tuple[dt.date, str], ...]
    _by_date: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.holidays)) != len(self.holidays):
            raise DataError("duplicate (date, name) pair in holiday calendar")
        by_date: dict[dt.date, list[str]] = {}
        for date, name in self.holidays:
            by_date.setdefault(date, []).append(name)
        object.__setattr__(self, "_by_date", by_date)

    @classmethod
    def us_federal(cls, first_year: int, last_year: int) -> "HolidayCalendar":
        pairs = []
        for year in range(first_year, last_year + 1):
            pairs.extend(_us_federal_dates(year))
        return cls(tuple(pairs))

    def names(self) -> tuple[str, ...]:
        return tuple(sorted({name for _, name in self.holidays}))

    def on(self, date: dt.date) -> tuple[str, ...]:
        return tuple(self._by_date.get(date, ()))

    def indicator_for_hours(self, hours: np.ndarray, names: tuple[str, ...]) -> np.ndarray:
        """0/1 matrix (len(hours), len(names)) marking holiday membership per hour."""
        col = {name: j for j, name in enumerate(names)}
        out = np.zeros((len(hours), len(names)))
        days = np.asarray(hours, dtype=np.int64) // 24
        for day in np.unique(days):
            for name in self.on(date_of(int(day) * 24)):
                if name in col:
                    out[days == day, col[name]] = 1.0
        return out


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split at an hourly grid boundary; train ends at boundary-1h."""

    train_fraction: float
    boundary: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(f"train_fraction must lie in (0,1), got {self.train_fraction}")

    @classmethod
    def from_series(cls, s: LoadSeries, train_fraction: float) -> "SplitSpec":
        if not 0.0 < train_fraction < 1.0:
            raise DataError(f"train_fraction must lie in (0,1), got {train_fraction}")
        return cls(train_fraction, s.start + int(len(s) * train_fraction))


def split(s: LoadSeries, spec: SplitSpec) -> tuple[LoadSeries, LoadSeries]:
    """Partition into (train, test); concatenation reproduces the original."""
    if not s.start < spec.boundary < s.end:
        raise DataError(
            f"{s.series}: split boundary {format_hour(spec.boundary)} outside series range"
        )
    return s.slice_hours(s.start, spec.boundary), s.slice_hours(spec.boundary, s.end)
