"""Time-series characteristics used for bus grouping and diagnostics.

Twelve features per series: trend strength, spike, linearity, curvature,
stability, lumpiness, seasonal strength, trough, entropy, ACF1, ACF10, and
peak. Remainder-based features operate on the residual of a classical
additive decomposition (centered moving-average trend, hour-of-day
seasonal profile); windowed and spectral features operate on the
standardized series.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DataError
from .series import LoadSeries, hour_of_day

FEATURE_NAMES = (
    "trend_strength",
    "spike",
    "linearity",
    "curvature",
    "stability",
    "lumpiness",
    "seasonal_strength",
    "trough",
    "entropy",
    "acf1",
    "acf10",
    "peak",
)


@dataclass(frozen=True)
class FeatureVector:
    trend_strength: float
    spike: float
    linearity: float
    curvature: float
    stability: float
    lumpiness: float
    seasonal_strength: float
    trough: float
    entropy: float
    acf1: float
    acf10: float
    peak: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES])

    def to_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class Decomposition:
    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    profile: np.ndarray  # one seasonal value per position in the period

    def reconstruct(self) -> np.ndarray:
        return (self.trend + self.seasonal) + self.remainder


def decompose(values: np.ndarray, period: int = 24, phase: int = 0) -> Decomposition:
    """Additive decomposition: MA(2*period+1) trend, per-phase seasonal means.

    ``phase`` is the position within the period of the first sample (for
    hourly load series: the hour of day at the series start). Trend
    endpoints are extended with the nearest valid value; the seasonal
    profile is re-centered to zero mean.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DataError("decompose expects a 1-d array")
    n = len(v)
    if n < 3 * period:
        raise DataError(f"series too short to decompose: {n} < {3 * period}")
    if np.isnan(v).any():
        raise DataError("decompose expects a cleaned (fully observed) series")

    half = period
    window = 2 * period + 1
    kernel = np.full(window, 1.0 / window)
    trend = np.empty(n)
    trend[half : n - half] = np.convolve(v, kernel, mode="valid")
    trend[:half] = trend[half]
    trend[n - half :] = trend[n - half - 1]

    detrended = v - trend
    positions = (phase + np.arange(n)) % period
    profile = np.array([detrended[positions == k].mean() for k in range(period)])
    profile = profile - profile.mean()
    seasonal = profile[positions]
    remainder = v - (trend + seasonal)
    return Decomposition(trend, seasonal, remainder, profile)


def autocorrelation(values: np.ndarray, lag: int) -> float:
    """Sample autocorrelation at ``lag`` (denominator over the full series)."""
    v = np.asarray(values, dtype=np.float64)
    centered = v - v.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0:
        return 0.0
    return float(np.dot(centered[:-lag], centered[lag:]) / denom)


def _variance_ratio_strength(component_plus_remainder: np.ndarray, remainder: np.ndarray) -> float:
    denom = component_plus_remainder.var()
    if denom == 0:
        return 0.0
    return max(0.0, 1.0 - remainder.var() / denom)


def _spikiness(remainder: np.ndarray) -> float:
    # variance of leave-one-out variances of the remainder (sample variance)
    r = np.asarray(remainder)
    n = len(r)
    s1, s2 = r.sum(), np.dot(r, r)
    loo_mean = (s1 - r) / (n - 1)
    loo_var = (s2 - r**2 - (n - 1) * loo_mean**2) / (n - 2)
    return float(loo_var.var(ddof=1))


def _orthogonal_quadratic(trend: np.ndarray) -> tuple[float, float]:
    """Coefficients of the trend on an orthonormal quadratic time basis."""
    n = len(trend)
    x = np.arange(n, dtype=np.float64)
    basis = np.stack([np.ones(n), x, x**2], axis=1)
    q, r = np.linalg.qr(basis)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs  # fix QR sign ambiguity: increasing linear column
    coefs = q.T @ trend
    return float(coefs[1]), float(coefs[2])


def _window_stats(z: np.ndarray, width: int = 24) -> tuple[float, float]:
    n_windows = len(z) // width
    blocks = z[: n_windows * width].reshape(n_windows, width)
    means = blocks.mean(axis=1)
    variances = blocks.var(axis=1, ddof=1)
    return float(means.var(ddof=1)), float(variances.var(ddof=1))


def _spectral_entropy(z: np.ndarray) -> float:
    spectrum = np.abs(np.fft.rfft(z)[1:]) ** 2  # drop the DC bin
    total = spectrum.sum()
    if total == 0 or len(spectrum) < 2:
        return 0.0
    p = spectrum / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / np.log(len(spectrum)))


MIN_FEATURE_HOURS = 14 * 24


def extract_features(series: LoadSeries, period: int = 24) -> FeatureVector:
    """Compute the 12 grouping features for one cleaned series."""
    v = series.load
    if len(v) < MIN_FEATURE_HOURS:
        raise DataError(f"{series.series}: need at least {MIN_FEATURE_HOURS} hours")
    std = v.std()
    if std == 0:
        raise DataError(f"{series.series}: zero-variance series has no features")
    z = (v - v.mean()) / std

    dec = decompose(v, period=period, phase=hour_of_day(series.start))
    stability, lumpiness = _window_stats(z, period)
    linearity, curvature = _orthogonal_quadratic(dec.trend)
    acf = [autocorrelation(dec.remainder, lag) for lag in range(1, 11)]
    return FeatureVector(
        trend_strength=_variance_ratio_strength(dec.trend + dec.remainder, dec.remainder),
        spike=_spikiness(dec.remainder),
        linearity=linearity,
        curvature=curvature,
        stability=stability,
        lumpiness=lumpiness,
        seasonal_strength=_variance_ratio_strength(dec.seasonal + dec.remainder, dec.remainder),
        trough=float(np.argmin(dec.profile)),
        entropy=_spectral_entropy(z),
        acf1=acf[0],
        acf10=float(np.sum(np.square(acf))),
        peak=float(np.argmax(dec.profile)),
    )
