"""Outlier replacement, gap imputation, and series exclusion rules.

The cleaning pass is deterministic and single-shot: the 3-sigma outlier
threshold uses mean/std computed once on the raw observed values, then gaps
of up to 20 consecutive hours are closed by linear interpolation between
the flanking observations and longer gaps (or gaps without both flanks) by
a trailing rolling mean over already-clean values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CleaningError
from .series import LoadSeries, SplitSpec

HOURS_PER_YEAR = 8760
TAIL_HOURS = 15 * 24


@dataclass(frozen=True)
class CleaningPolicy:
    outlier_sigma: float = 3.0
    max_linear_gap: int = 20
    rolling_window: int = 168
    rolling_min_obs: int = 24


@dataclass
class FieldCleaningStats:
    outliers_replaced: int = 0
    linear_imputed: int = 0
    rolling_imputed: int = 0

    def to_dict(self) -> dict:
        return {
            "outliers_replaced": self.outliers_replaced,
            "linear_imputed": self.linear_imputed,
            "rolling_imputed": self.rolling_imputed,
        }


@dataclass
class CleaningReport:
    """Per-rule counts per series, JSON-serializable."""

    per_series: dict[str, dict[str, dict]] = field(default_factory=dict)

    def add(self, series_key: str, load: FieldCleaningStats, temp: FieldCleaningStats) -> None:
        self.per_series[series_key] = {"load": load.to_dict(), "temperature": temp.to_dict()}

    def to_json_dict(self) -> dict:
        return {"series": self.per_series}


def _missing_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """[start, end) index ranges of consecutive True entries."""
    runs = []
    i, n = 0, len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _clean_values(values: np.ndarray, policy: CleaningPolicy) -> tuple[np.ndarray, FieldCleaningStats]:
    stats = FieldCleaningStats()
    v = values.astype(np.float64).copy()
    observed = ~np.isnan(v)
    if observed.sum() < 2:
        raise CleaningError("series has fewer than 2 observed values")

    mean = v[observed].mean()
    std = v[observed].std()
    outliers = observed & (np.abs(v - mean) > policy.outlier_sigma * std)
    stats.outliers_replaced = int(outliers.sum())
    v[outliers] = np.nan
    if np.isnan(v).all():
        raise CleaningError("all values flagged as outliers")
    fallback_mean = v[~np.isnan(v)].mean()

    for start, end in _missing_runs(np.isnan(v)):
        length = end - start
        has_flanks = start > 0 and end < len(v)
        if has_flanks and length <= policy.max_linear_gap:
            left, right = v[start - 1], v[end]
            steps = np.arange(1, length + 1) / (length + 1)
            v[start:end] = left + steps * (right - left)
            stats.linear_imputed += length
        else:
            for i in range(start, end):
                window = v[max(0, i - policy.rolling_window) : i]
                window = window[~np.isnan(window)]
                if len(window) >= policy.rolling_min_obs:
                    v[i] = window.mean()
                else:
                    v[i] = fallback_mean
            stats.rolling_imputed += length
    return v, stats


def clean_series(
    s: LoadSeries, policy: CleaningPolicy | None = None
) -> tuple[LoadSeries, CleaningReport]:
    """Return a fully observed copy of ``s`` plus a per-rule count report.

    Temperature is imputed with the same linear/rolling rules as load.
    """
    policy = policy or CleaningPolicy()
    try:
        load, load_stats = _clean_values(s.load, policy)
        temp, temp_stats = _clean_values(s.temperature, policy)
    except CleaningError as exc:
        raise CleaningError(f"{s.series}: {exc}") from None
    report = CleaningReport()
    report.add(str(s.series), load_stats, temp_stats)
    return replace(s, load=load, temperature=temp), report


def clean_all(
    series: list[LoadSeries], policy: CleaningPolicy | None = None
) -> tuple[list[LoadSeries], CleaningReport]:
    report = CleaningReport()
    cleaned = []
    for s in series:
        c, r = clean_series(s, policy)
        cleaned.append(c)
        report.per_series.update(r.per_series)
    return cleaned, report


@dataclass(frozen=True)
class DropReason:
    series: LoadSeries
    reason: str

    def to_dict(self) -> dict:
        return {"series_id": self.series.series.id, "level": self.series.series.level.value, "reason": self.reason}


def exclude_unusable(
    series: list[LoadSeries], split_spec: SplitSpec
) -> tuple[list[LoadSeries], list[DropReason]]:
    """Apply the pre-cleaning exclusion rules on raw (uncleaned) series.

    Drops: fewer than one year (8760) of observed training hours, overall
    missing ratio above 20%, zero variance, or the final 15x24 training
    hours entirely missing. Hours the series does not cover count as
    missing for the training-window rules.
    """
    kept, dropped = [], []
    for s in series:
        observed = ~np.isnan(s.load)
        train_mask = s.hours() < split_spec.boundary
        n_train_obs = int((observed & train_mask).sum())
        missing_ratio = 1.0 - observed.mean() if len(s) else 1.0
        obs_values = s.load[observed]
        tail_lo, tail_hi = split_spec.boundary - TAIL_HOURS, split_spec.boundary
        tail_mask = (s.hours() >= tail_lo) & (s.hours() < tail_hi)
        tail_observed = int((observed & tail_mask).sum())

        if n_train_obs < HOURS_PER_YEAR:
            dropped.append(DropReason(s, "short_training"))
        elif missing_ratio > 0.20:
            dropped.append(DropReason(s, "missing_ratio"))
        elif len(obs_values) == 0 or np.all(obs_values == obs_values[0]):
            dropped.append(DropReason(s, "constant"))
        elif tail_observed == 0:
            dropped.append(DropReason(s, "missing_tail"))
        else:
            kept.append(s)
    return kept, dropped
