"""k-means grouping of bus series on their time-series features.

Lloyd's iteration with greedy farthest-point initialization; features are
z-scored per dimension before clustering so no single feature dominates
the Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .features import FEATURE_NAMES, FeatureVector
from .series import SeriesId

MAX_ITER = 300
TOL = 1e-6


@dataclass(frozen=True)
class GroupAssignment:
    """Series-to-group mapping plus the fitted centroids (standardized space)."""

    groups: dict[SeriesId, int]
    centroids: np.ndarray
    seed: int
    inertia: float
    feature_means: np.ndarray
    feature_stds: np.ndarray

    @property
    def k(self) -> int:
        return len(self.centroids)

    def members(self, group: int) -> list[SeriesId]:
        return sorted(s for s, g in self.groups.items() if g == group)

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "k": self.k,
            "inertia": self.inertia,
            "groups": {s.id: g for s, g in sorted(self.groups.items())},
            "centroids": [[float(x) for x in c] for c in self.centroids],
            "feature_names": list(FEATURE_NAMES),
            "feature_means": [float(x) for x in self.feature_means],
            "feature_stds": [float(x) for x in self.feature_stds],
        }


def standardize_features(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = matrix.mean(axis=0)
    stds = matrix.std(axis=0)
    safe = np.where(stds > 0, stds, 1.0)
    return (matrix - means) / safe, means, stds


def _farthest_point_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    chosen = [int(rng.integers(len(points)))]
    for _ in range(1, k):
        dists = np.min(
            [np.sum((points - points[c]) ** 2, axis=1) for c in chosen], axis=0
        )
        chosen.append(int(np.argmax(dists)))
    return points[chosen].copy()


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sq = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(sq, axis=1)
    return labels, sq[np.arange(len(points)), labels]


def cluster_kmeans(
    features: dict[SeriesId, FeatureVector],
    k: int = 3,
    seed: int = 42,
    trace: list | None = None,
) -> GroupAssignment:
    """Cluster series into ``k`` non-empty groups; deterministic per seed.

    ``trace``, when given, collects the inertia after each Lloyd step.
    """
    ids = sorted(features)
    if len(ids) < k:
        raise DataError(f"need at least {k} series to form {k} groups, got {len(ids)}")
    raw = np.stack([features[s].as_array() for s in ids])
    points, means, stds = standardize_features(raw)
    rng = np.random.default_rng(seed)

    def fix_empty(labels: np.ndarray, dists: np.ndarray) -> bool:
        # re-seat an emptied cluster with the point farthest from its centroid
        fixed = False
        for g in range(k):
            if not np.any(labels == g):
                worst = int(np.argmax(dists))
                labels[worst] = g
                dists[worst] = 0.0
                fixed = True
        return fixed

    centroids = _farthest_point_init(points, k, rng)
    labels, dists = _assign(points, centroids)
    for _ in range(MAX_ITER):
        fix_empty(labels, dists)
        new_centroids = np.stack([points[labels == g].mean(axis=0) for g in range(k)])
        movement = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        labels, dists = _assign(points, centroids)
        if trace is not None:
            trace.append(float(dists.sum()))
        if movement < TOL:
            break
    if fix_empty(labels, dists):  # invariant guard; converged runs never hit this
        centroids = np.stack([points[labels == g].mean(axis=0) for g in range(k)])
    inertia = float(np.sum((points - centroids[labels]) ** 2))

    return GroupAssignment(
        groups={s: int(g) for s, g in zip(ids, labels)},
        centroids=centroids,
        seed=seed,
        inertia=inertia,
        feature_means=means,
        feature_stds=stds,
    )
