"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..errors import ModelError

SUMMER_MONTHS = (4, 5, 6, 7, 8, 9)  # April through September; winter is the rest

YEARLY_PERIOD_HOURS = 8766.0  # 365.25 days
WEEKLY_PERIOD_HOURS = 168.0
DAILY_PERIOD_HOURS = 24.0


@dataclass(frozen=True)
class HitsGamConfig:
    n_lags: int = 15 * 24
    horizon: int = 33
    quantiles: tuple[float, ...] = (0.01, 0.5, 0.99)
    yearly_order: int = 10
    weekly_order: int = 3
    daily_order: int = 6
    n_changepoints: int = 0
    ar_layers: tuple[int, ...] = (32, 64, 32, 16)
    lagged_reg_layers: tuple[int, ...] = (32, 32)
    batch_size: int = 128
    learning_rate: float = 1e-3
    epochs: int = 30
    newer_samples_weight: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        object.__setattr__(self, "ar_layers", tuple(int(x) for x in self.ar_layers))
        object.__setattr__(
            self, "lagged_reg_layers", tuple(int(x) for x in self.lagged_reg_layers)
        )
        self.validate()

    def validate(self) -> None:
        if self.horizon < 1:
            raise ModelError("horizon must be at least 1")
        if self.n_lags < 1:
            raise ModelError("n_lags must be at least 1")
        qs = self.quantiles
        if not qs or any(not 0 < q < 1 for q in qs):
            raise ModelError("quantiles must lie strictly inside (0,1)")
        if list(qs) != sorted(set(qs)):
            raise ModelError("quantiles must be strictly increasing")
        if 0.5 not in qs:
            raise ModelError("quantiles must contain the median 0.5")
        if not self.ar_layers or not self.lagged_reg_layers:
            raise ModelError("layer lists must be non-empty")
        if self.n_changepoints != 0:
            raise ModelError("changepoint learning is not supported; n_changepoints is fixed at 0")

    @property
    def n_quantiles(self) -> int:
        return len(self.quantiles)

    @property
    def median_index(self) -> int:
        return self.quantiles.index(0.5)

    @property
    def n_seasonal_coefs(self) -> int:
        # yearly + weekly + conditional daily (summer block + winter block)
        return 2 * (self.yearly_order + self.weekly_order + 2 * self.daily_order)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "HitsGamConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ModelError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kwargs)
