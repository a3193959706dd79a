"""Deterministic synthetic multi-level load dataset with known structure.

Each bus mixes a base level with drift, archetype-specific daily/weekly
shapes (summer mid-day peak, winter dual peak), a piecewise-linear
temperature response hinged at 57 F, holiday offsets, and AR(1) noise.
The utility series is a scaled bus sum plus independent measurement noise,
mimicking the data-source mismatch between metering levels. Ground-truth
components come back alongside the series for oracle checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series import (
    HolidayCalendar,
    Level,
    LoadSeries,
    SeriesId,
    date_of,
    hour_to_datetime,
    parse_hour,
)

BREAKPOINT_F = 57.0


@dataclass(frozen=True)
class ArchetypeSpec:
    """Per-group shape knobs; strong contrasts keep the groups separable."""

    name: str
    daily_summer_amp: float  # fraction of base load
    daily_winter_amp: float
    weekly_amp: float
    peak_shift_hours: int  # rotates the daily profiles
    noise_frac: float  # AR(1) innovation sigma as fraction of base
    temp_sensitivity: float  # multiplies the V-shape slopes


DEFAULT_ARCHETYPES = (
    ArchetypeSpec("residential", 0.30, 0.22, 0.04, 4, 0.020, 1.0),
    ArchetypeSpec("commercial", 0.22, 0.16, 0.18, 0, 0.015, 0.6),
    ArchetypeSpec("volatile", 0.04, 0.03, 0.02, 0, 0.120, 0.2),
)


@dataclass(frozen=True)
class SynthSpec:
    n_buses: int = 20
    hours: int = 2 * 8760
    start: str = "2019-01-01T00:00:00"
    seed: int = 42
    base_load_range: tuple[float, float] = (5.0, 40.0)
    temp_mean_f: float = 57.0
    temp_yearly_amp_f: float = 24.0
    temp_daily_amp_f: float = 7.0
    temp_noise_f: float = 2.0
    heating_slope_mw_per_f: float = 0.06
    cooling_slope_mw_per_f: float = 0.10
    temp_response_ref_mw: float = 20.0  # slopes scale with base load / this
    holiday_offset_frac: float = -0.08
    ar1_coef: float = 0.7
    utility_scale: float = 1.02
    utility_noise_frac: float = 0.004
    proportion_drift: float = 0.0  # max fractional drift of a bus over the window
    archetypes: tuple[ArchetypeSpec, ...] = DEFAULT_ARCHETYPES

    def __post_init__(self):
        if self.n_buses < 1 or self.hours < 24:
            raise DataError("spec requires at least one bus and one day of hours")
        if not self.archetypes:
            raise DataError("spec requires at least one archetype")

    def to_dict(self) -> dict:
        from dataclasses import asdict

        d = asdict(self)
        d["archetypes"] = [asdict(a) for a in self.archetypes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        if "archetypes" in d:
            d["archetypes"] = tuple(ArchetypeSpec(**a) for a in d["archetypes"])
        if "base_load_range" in d:
            d["base_load_range"] = tuple(d["base_load_range"])
        return cls(**d)


# zero-mean daily shapes: summer single mid-day peak, winter morning and
# evening peaks with a mid-day dip
_HOURS = np.arange(24)
SUMMER_PROFILE = np.cos(2 * np.pi * (_HOURS - 15) / 24)
SUMMER_PROFILE = SUMMER_PROFILE - SUMMER_PROFILE.mean()
WINTER_PROFILE = (
    0.8 * np.exp(-0.5 * ((_HOURS - 8) / 2.5) ** 2)
    + 1.0 * np.exp(-0.5 * ((_HOURS - 19) / 2.5) ** 2)
    - 0.4 * np.exp(-0.5 * ((_HOURS - 13) / 2.0) ** 2)
)
WINTER_PROFILE = WINTER_PROFILE - WINTER_PROFILE.mean()
WEEKLY_PROFILE = np.array([0.5, 0.7, 0.8, 0.8, 0.6, -1.4, -2.0]) / 2.0  # Thu=0 epoch


@dataclass
class SynthTruth:
    """Ground-truth pieces kept for oracle checks."""

    spec: SynthSpec
    archetype_of: dict[str, str]
    base_load: dict[str, float]
    components: dict[str, dict[str, np.ndarray]]
    temperature: np.ndarray
    true_proportions_full_window: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "archetype_of": self.archetype_of,
            "base_load": self.base_load,
            "true_proportions_full_window": self.true_proportions_full_window.tolist(),
        }


@dataclass
class SynthDataset:
    utility: LoadSeries
    buses: list[LoadSeries]
    hierarchy_map: dict[str, list[str]]
    truth: SynthTruth


def _temperature_path(spec: SynthSpec, start: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(spec.hours)
    hours = start + t
    day_of_year = np.array([hour_to_datetime(int(h)).timetuple().tm_yday for h in hours])
    hour_of_day = hours % 24
    yearly = -np.cos(2 * np.pi * (day_of_year - 15) / 365.25)  # coldest mid-January
    daily = -np.cos(2 * np.pi * (hour_of_day - 15) / 24)  # warmest mid-afternoon
    noise = rng.normal(0.0, spec.temp_noise_f, spec.hours)
    return spec.temp_mean_f + spec.temp_yearly_amp_f * yearly + spec.temp_daily_amp_f * daily + noise


def _holiday_mask(calendar: HolidayCalendar, start: int, n: int) -> np.ndarray:
    hours = start + np.arange(n)
    return np.array([1.0 if calendar.on(date_of(int(h))) else 0.0 for h in hours])


def generate(spec: SynthSpec) -> SynthDataset:
    """Build the dataset; identical specs produce bit-identical output."""
    start = parse_hour(spec.start)
    rng = np.random.default_rng(spec.seed)
    n = spec.hours
    t = np.arange(n, dtype=np.float64)
    hours = start + np.arange(n, dtype=np.int64)
    hour_of_day = (hours % 24).astype(int)
    day_index = ((hours // 24) % 7).astype(int)
    months = np.array([hour_to_datetime(int(h)).month for h in hours])
    is_summer = np.isin(months, (4, 5, 6, 7, 8, 9)).astype(np.float64)

    first_year = hour_to_datetime(start).year
    last_year = hour_to_datetime(start + n).year
    calendar = HolidayCalendar.us_federal(first_year, last_year)
    holiday = _holiday_mask(calendar, start, n)

    temperature = _temperature_path(spec, start, rng)
    lo, hi = spec.base_load_range
    base_loads = rng.uniform(lo, hi, spec.n_buses)
    # deterministic drift spread in [-1, 1]: alternating sign magnitudes
    if spec.n_buses > 1:
        drift_dir = np.linspace(-1.0, 1.0, spec.n_buses)
    else:
        drift_dir = np.zeros(1)

    buses, components = [], {}
    archetype_of, base_of = {}, {}
    for i in range(spec.n_buses):
        arch = spec.archetypes[i % len(spec.archetypes)]
        sid = f"bus{i:03d}"
        base = float(base_loads[i])
        drift = spec.proportion_drift * drift_dir[i]
        trend = base * (1.0 + drift * t / max(n - 1, 1))

        summer_shape = np.roll(SUMMER_PROFILE, arch.peak_shift_hours)
        winter_shape = np.roll(WINTER_PROFILE, arch.peak_shift_hours)
        daily = base * (
            arch.daily_summer_amp * summer_shape[hour_of_day] * is_summer
            + arch.daily_winter_amp * winter_shape[hour_of_day] * (1.0 - is_summer)
        )
        weekly = base * arch.weekly_amp * WEEKLY_PROFILE[day_index]
        seasonality = daily + weekly

        temp_resp = (arch.temp_sensitivity * base / spec.temp_response_ref_mw) * (
            spec.heating_slope_mw_per_f * np.maximum(BREAKPOINT_F - temperature, 0.0)
            + spec.cooling_slope_mw_per_f * np.maximum(temperature - BREAKPOINT_F, 0.0)
        )
        events = spec.holiday_offset_frac * base * holiday

        innovations = rng.normal(0.0, arch.noise_frac * base, n)
        noise = np.empty(n)
        acc = 0.0
        for j in range(n):
            acc = spec.ar1_coef * acc + innovations[j]
            noise[j] = acc

        load = np.maximum(trend + seasonality + temp_resp + events + noise, 0.0)
        buses.append(
            LoadSeries(SeriesId(sid, Level.BUS), start, load, temperature.copy())
        )
        components[sid] = {
            "trend": trend,
            "seasonality": seasonality,
            "temperature": temp_resp,
            "events": events,
            "noise": noise,
        }
        archetype_of[sid] = arch.name
        base_of[sid] = base

    bus_sum = np.sum([b.load for b in buses], axis=0)
    meas_noise = rng.normal(0.0, spec.utility_noise_frac * bus_sum.mean(), n)
    utility_load = np.maximum(spec.utility_scale * bus_sum + meas_noise, 0.0)
    utility = LoadSeries(SeriesId("utility", Level.UTILITY), start, utility_load, temperature.copy())

    bus_means = np.array([b.load.mean() for b in buses])
    truth = SynthTruth(
        spec=spec,
        archetype_of=archetype_of,
        base_load=base_of,
        components=components,
        temperature=temperature,
        true_proportions_full_window=bus_means / bus_means.sum(),
    )
    return SynthDataset(
        utility=utility,
        buses=buses,
        hierarchy_map={"utility": [b.series.id for b in buses]},
        truth=truth,
    )
