"""Pinball (quantile) loss and its derivative."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError


def pinball_loss(actual: float, predicted: float, q: float) -> float:
    """q*(a-p) when a >= p, else (1-q)*(p-a); non-negative, zero at a == p."""
    if not 0.0 < q < 1.0:
        raise ModelError(f"quantile must lie in (0,1), got {q}")
    diff = actual - predicted
    return q * diff if diff >= 0 else (q - 1.0) * diff


def pinball_terms(targets: np.ndarray, preds: np.ndarray, quantiles: np.ndarray) -> np.ndarray:
    """Elementwise losses for targets (B,H) against preds (B,Q,H)."""
    diff = targets[:, None, :] - preds
    qv = quantiles[None, :, None]
    return np.where(diff >= 0, qv * diff, (qv - 1.0) * diff)


def pinball_dpred(targets: np.ndarray, preds: np.ndarray, quantiles: np.ndarray) -> np.ndarray:
    """d(loss)/d(pred), matching the a >= p branch choice of pinball_loss."""
    diff = targets[:, None, :] - preds
    qv = quantiles[None, :, None]
    return np.where(diff >= 0, -qv, 1.0 - qv)
