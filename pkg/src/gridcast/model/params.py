"""The fitted parameter bank and its serialization.

Local banks (trend, seasonal Fourier coefficients, holiday offsets, load
scaler) are stacked per series row; the AR and temperature networks and
the pooled temperature scaler are shared. All component parameters live
in scaled (standardized-load) units.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ModelError
from ..series import HolidayCalendar, Level, SeriesId, date_of
from .components import seasonal_design_row
from .config import HitsGamConfig
from .network import MLP

ARTIFACT_VERSION = 1


@dataclass
class HitsGamParams:
    config: HitsGamConfig
    seed: int
    series_ids: list[SeriesId]
    # local banks, one row per series
    trend_m: np.ndarray  # (S,)
    trend_k: np.ndarray  # (S,)
    trend_deltas: np.ndarray  # (S, n_changepoints); inert at 0 changepoints
    changepoints: np.ndarray  # (n_changepoints,) positions in normalized time
    seas_coef: np.ndarray  # (S, n_seasonal_coefs)
    event_coef: np.ndarray  # (S, n_holidays)
    load_mean: np.ndarray  # (S,)
    load_std: np.ndarray  # (S,)
    train_start: np.ndarray  # (S,) epoch hour of each series' training start
    train_len: np.ndarray  # (S,) training hours, normalizes trend time
    # shared banks
    ar_net: MLP
    temp_net: MLP
    temp_mean: float
    temp_std: float
    holiday_names: tuple[str, ...]
    calendar: HolidayCalendar
    _row: dict[SeriesId, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.series_ids)) != len(self.series_ids):
            raise ModelError("duplicate series in parameter bank")
        if np.any(self.load_std <= 0) or self.temp_std <= 0:
            raise ModelError("scaler std must be positive")
        self._row = {sid: i for i, sid in enumerate(self.series_ids)}

    @property
    def n_series(self) -> int:
        return len(self.series_ids)

    def row(self, series: SeriesId) -> int:
        try:
            return self._row[series]
        except KeyError:
            raise ModelError(f"unknown series {series}") from None

    @classmethod
    def initialize(
        cls,
        cfg: HitsGamConfig,
        seed: int,
        series_ids: list[SeriesId],
        load_mean: np.ndarray,
        load_std: np.ndarray,
        train_start: np.ndarray,
        train_len: np.ndarray,
        temp_mean: float,
        temp_std: float,
        calendar: HolidayCalendar,
    ) -> "HitsGamParams":
        """Zero local banks; Glorot-uniform nets drawn from the run seed."""
        rng = np.random.default_rng(seed)
        n = len(series_ids)
        names = calendar.names()
        ar_sizes = (cfg.n_lags, *cfg.ar_layers, cfg.horizon * cfg.n_quantiles)
        temp_sizes = (cfg.horizon, *cfg.lagged_reg_layers, cfg.horizon * cfg.n_quantiles)
        return cls(
            config=cfg,
            seed=seed,
            series_ids=list(series_ids),
            trend_m=np.zeros(n),
            trend_k=np.zeros(n),
            trend_deltas=np.zeros((n, cfg.n_changepoints)),
            changepoints=np.zeros(cfg.n_changepoints),
            seas_coef=np.zeros((n, cfg.n_seasonal_coefs)),
            event_coef=np.zeros((n, len(names))),
            load_mean=np.asarray(load_mean, dtype=np.float64),
            load_std=np.asarray(load_std, dtype=np.float64),
            train_start=np.asarray(train_start, dtype=np.int64),
            train_len=np.asarray(train_len, dtype=np.int64),
            ar_net=MLP(ar_sizes, rng),
            temp_net=MLP(temp_sizes, rng),
            temp_mean=float(temp_mean),
            temp_std=float(temp_std),
            holiday_names=names,
            calendar=calendar,
        )

    # ------------------------------------------------------------ components

    def trend_values(self, rows: np.ndarray, hours: np.ndarray) -> np.ndarray:
        """Piecewise-linear trend in scaled units; inert changepoints at 0."""
        t_norm = (np.asarray(hours, dtype=np.float64) - self.train_start[rows]) / self.train_len[rows]
        out = self.trend_m[rows] + self.trend_k[rows] * t_norm
        if len(self.changepoints):
            hinge = np.maximum(t_norm[..., None] - self.changepoints, 0.0)
            out = out + np.einsum("...c,...c->...", hinge, self.trend_deltas[rows])
        return out

    def local_design(self, hours: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(seasonal features, holiday indicators) for given epoch hours."""
        hours = np.atleast_1d(np.asarray(hours, dtype=np.int64))
        return (
            seasonal_design_row(hours, self.config),
            self.calendar.indicator_for_hours(hours, self.holiday_names),
        )

    # --------------------------------------------------------- serialization

    def to_artifact_dict(self) -> dict:
        return {
            "format": "gridcast-hitsgam",
            "version": ARTIFACT_VERSION,
            "config": self.config.to_dict(),
            "seed": self.seed,
            "series": [
                {
                    "id": sid.id,
                    "level": sid.level.value,
                    "trend_m": float(self.trend_m[i]),
                    "trend_k": float(self.trend_k[i]),
                    "trend_deltas": self.trend_deltas[i].tolist(),
                    "seas_coef": self.seas_coef[i].tolist(),
                    "event_coef": self.event_coef[i].tolist(),
                    "load_mean": float(self.load_mean[i]),
                    "load_std": float(self.load_std[i]),
                    "train_start": int(self.train_start[i]),
                    "train_len": int(self.train_len[i]),
                }
                for i, sid in enumerate(self.series_ids)
            ],
            "changepoints": self.changepoints.tolist(),
            "ar_net": self.ar_net.to_dict(),
            "temp_net": self.temp_net.to_dict(),
            "temp_mean": self.temp_mean,
            "temp_std": self.temp_std,
            "holiday_names": list(self.holiday_names),
            "holidays": [[d.isoformat(), name] for d, name in self.calendar.holidays],
        }

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_artifact_dict(), sort_keys=True, separators=(",", ":")))

    @classmethod
    def from_artifact_dict(cls, d: dict) -> "HitsGamParams":
        if d.get("format") != "gridcast-hitsgam" or d.get("version") != ARTIFACT_VERSION:
            raise ModelError("unrecognized model artifact format/version")
        import datetime as dt

        calendar = HolidayCalendar(
            tuple((dt.date.fromisoformat(day), name) for day, name in d["holidays"])
        )
        rows = d["series"]
        return cls(
            config=HitsGamConfig.from_dict(d["config"]),
            seed=int(d["seed"]),
            series_ids=[SeriesId(r["id"], Level(r["level"])) for r in rows],
            trend_m=np.array([r["trend_m"] for r in rows]),
            trend_k=np.array([r["trend_k"] for r in rows]),
            trend_deltas=np.array([r["trend_deltas"] for r in rows]).reshape(len(rows), -1),
            changepoints=np.asarray(d["changepoints"], dtype=np.float64),
            seas_coef=np.array([r["seas_coef"] for r in rows]),
            event_coef=np.array([r["event_coef"] for r in rows]).reshape(len(rows), -1),
            load_mean=np.array([r["load_mean"] for r in rows]),
            load_std=np.array([r["load_std"] for r in rows]),
            train_start=np.array([r["train_start"] for r in rows], dtype=np.int64),
            train_len=np.array([r["train_len"] for r in rows], dtype=np.int64),
            ar_net=MLP.from_dict(d["ar_net"]),
            temp_net=MLP.from_dict(d["temp_net"]),
            temp_mean=float(d["temp_mean"]),
            temp_std=float(d["temp_std"]),
            holiday_names=tuple(d["holiday_names"]),
            calendar=calendar,
        )

    @classmethod
    def load(cls, path: str | Path) -> "HitsGamParams":
        return cls.from_artifact_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------- point operations


def trend_at(params: HitsGamParams, series: SeriesId, t_hours: float) -> float:
    """Trend at ``t_hours`` since the series' training start (scaled units)."""
    row = params.row(series)
    hour = params.train_start[row] + t_hours
    return float(params.trend_values(np.array([row]), np.array([hour]))[0])


def seasonality_at(params: HitsGamParams, series: SeriesId, hour: int) -> float:
    """Sum of yearly, weekly, and gated daily blocks at an epoch hour."""
    row = params.row(series)
    feats, _ = params.local_design(np.array([hour], dtype=np.int64))
    return float(feats[0] @ params.seas_coef[row])


def events_at(params: HitsGamParams, series: SeriesId, hour: int) -> float:
    """Summed holiday offsets active on the date containing ``hour``."""
    row = params.row(series)
    total = 0.0
    for name in params.calendar.on(date_of(int(hour))):
        if name in params.holiday_names:
            total += float(params.event_coef[row, params.holiday_names.index(name)])
    return total
