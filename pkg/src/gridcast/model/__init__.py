"""The hits-GAM forecasting model.

Additive components with per-series local banks (trend, seasonality,
holiday events) and shared global neural banks (autoregression on the
last 15 days of residualized load, regression on future temperature),
trained jointly on a weighted pinball loss across quantiles.
"""

from .config import HitsGamConfig, SUMMER_MONTHS
from .forecast import COMPONENT_NAMES, ForecastBundle, forecast, forecast_many
from .loss import pinball_loss
from .params import HitsGamParams, events_at, seasonality_at, trend_at
from .engine import ar_forward, batch_loss, temperature_forward

__all__ = [
    "COMPONENT_NAMES",
    "ForecastBundle",
    "HitsGamConfig",
    "HitsGamParams",
    "SUMMER_MONTHS",
    "ar_forward",
    "batch_loss",
    "events_at",
    "forecast",
    "forecast_many",
    "pinball_loss",
    "seasonality_at",
    "temperature_forward",
    "trend_at",
]
