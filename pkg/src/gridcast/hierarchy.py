"""Utility/bus hierarchy and its historical share statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .series import Level, LoadSeries, SeriesId, SplitSpec


@dataclass(frozen=True)
class Hierarchy:
    """One utility, its member buses, and training-window share statistics.

    ``proportions[i]`` is bus i's share of the summed bus load over the
    training window; ``agg_scale`` is mean(utility) / mean(sum of buses)
    over the same hours.
    """

    utility: SeriesId
    buses: tuple[SeriesId, ...]
    proportions: np.ndarray
    agg_scale: float

    def __post_init__(self):
        object.__setattr__(self, "proportions", np.asarray(self.proportions, dtype=np.float64))
        if len(self.buses) != len(self.proportions):
            raise DataError("one proportion per bus required")
        if np.any(self.proportions < 0):
            raise DataError("proportions must be non-negative")
        if abs(self.proportions.sum() - 1.0) > 1e-9:
            raise DataError(f"proportions sum to {self.proportions.sum()}, expected 1")
        if not self.agg_scale > 0:
            raise DataError("agg_scale must be positive")
        if len(set(self.buses)) != len(self.buses):
            raise DataError("duplicate bus in hierarchy")

    def proportion_of(self, bus: SeriesId) -> float:
        try:
            return float(self.proportions[self.buses.index(bus)])
        except ValueError:
            raise DataError(f"{bus} not in hierarchy of {self.utility}") from None

    def to_json_dict(self) -> dict:
        return {
            "utility": self.utility.id,
            "buses": [b.id for b in self.buses],
            "proportions": [float(p) for p in self.proportions],
            "agg_scale": float(self.agg_scale),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Hierarchy":
        return cls(
            utility=SeriesId(d["utility"], Level.UTILITY),
            buses=tuple(SeriesId(b, Level.BUS) for b in d["buses"]),
            proportions=np.asarray(d["proportions"], dtype=np.float64),
            agg_scale=float(d["agg_scale"]),
        )


def _train_values(s: LoadSeries, split_spec: SplitSpec) -> np.ndarray:
    if not s.start < split_spec.boundary <= s.end:
        raise DataError(f"{s.series} does not span the training window")
    values = s.load[: split_spec.boundary - s.start]
    if np.isnan(values).any():
        raise DataError(f"{s.series} has missing values; clean before computing hierarchy stats")
    return values


def compute_hierarchy_stats(
    utility: LoadSeries, buses: list[LoadSeries], split_spec: SplitSpec
) -> Hierarchy:
    """Training-window proportions and the utility/bus-sum scale ratio."""
    if not buses:
        raise DataError("hierarchy requires at least one bus")
    bus_values = [_train_values(b, split_spec) for b in buses]
    n = min(len(v) for v in bus_values)
    if len({len(v) for v in bus_values}) != 1:
        raise DataError("bus training windows are not aligned")
    total = np.sum([v[:n] for v in bus_values], axis=0)
    total_mean = total.mean()
    if total_mean == 0:
        raise DataError("aggregate bus load has zero mean over the training window")
    proportions = np.array([v[:n].mean() / total_mean for v in bus_values])
    utility_mean = _train_values(utility, split_spec)[:n].mean()
    return Hierarchy(
        utility=utility.series,
        buses=tuple(b.series for b in buses),
        proportions=proportions,
        agg_scale=float(utility_mean / total_mean),
    )


def aggregate_bus_series(buses: list[LoadSeries], utility: SeriesId | None = None) -> LoadSeries:
    """Sum aligned bus series into one aggregate (temperature averaged)."""
    if not buses:
        raise DataError("cannot aggregate an empty bus list")
    starts = {b.start for b in buses}
    lengths = {len(b) for b in buses}
    if len(starts) != 1 or len(lengths) != 1:
        raise DataError("bus series are not aligned")
    sid = utility or SeriesId(f"agg_of_{len(buses)}_buses", Level.UTILITY)
    return LoadSeries(
        series=sid,
        start=buses[0].start,
        load=np.sum([b.load for b in buses], axis=0),
        temperature=np.mean([b.temperature for b in buses], axis=0),
    )
