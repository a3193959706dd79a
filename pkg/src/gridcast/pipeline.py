"""End-to-end flows shared by the CLI, the service wiring, and experiments.

Everything here operates on cleaned series; the functions stitch together
splitting, training, forecasting at the day-ahead evaluation origins,
reconciliation, and scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import KnnConfig, KnnForecaster, snaive_forecast
from .errors import DataError, ModelError
from .evaluation import select_eval_origins
from .hierarchy import Hierarchy, aggregate_bus_series, compute_hierarchy_stats
from .model import HitsGamConfig, forecast_many
from .model.engine import build_series_data
from .model.forecast import ForecastBundle
from .model.params import HitsGamParams
from .reconcile import bottom_up, scale_to_utility, top_down
from .series import LoadSeries, SeriesId, SplitSpec, split
from .training import FitResult, PoolingSpec, fit


def dataset_split_spec(series: list[LoadSeries], train_fraction: float) -> SplitSpec:
    """One split boundary for the whole dataset, from the union grid."""
    if not series:
        raise DataError("empty dataset")
    lo = min(s.start for s in series)
    hi = max(s.end for s in series)
    boundary = lo + int((hi - lo) * train_fraction)
    return SplitSpec(train_fraction, boundary)


def train_splits(series: list[LoadSeries], spec: SplitSpec) -> list[LoadSeries]:
    return [split(s, spec)[0] for s in series]


@dataclass
class ModelSet:
    """One or more fitted banks with a lookup by covered series."""

    results: list[FitResult]

    def bank_for(self, series: SeriesId) -> HitsGamParams:
        for r in self.results:
            if r.covers(series):
                return r.params
        raise ModelError(f"no fitted bank covers {series}")

    def to_json_dict(self) -> dict:
        return {
            "format": "gridcast-model-set",
            "version": 1,
            "banks": [
                {
                    "mode": r.mode.value,
                    "group": r.group,
                    "epoch_losses": r.epoch_losses,
                    "params": r.params.to_artifact_dict(),
                }
                for r in self.results
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelSet":
        from .training import PoolingMode

        if d.get("format") != "gridcast-model-set":
            raise ModelError("not a model-set artifact")
        results = [
            FitResult(
                params=HitsGamParams.from_artifact_dict(b["params"]),
                epoch_losses=list(b["epoch_losses"]),
                mode=PoolingMode(b["mode"]),
                group=b["group"],
            )
            for b in d["banks"]
        ]
        return cls(results)

    def save(self, path) -> None:
        import json
        from pathlib import Path

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":")))

    @classmethod
    def load(cls, path) -> "ModelSet":
        import json
        from pathlib import Path

        return cls.from_json_dict(json.loads(Path(path).read_text()))


def train_model_set(
    series: list[LoadSeries],
    split_spec: SplitSpec,
    pooling: PoolingSpec,
    cfg: HitsGamConfig | None = None,
    seed: int = 0,
) -> ModelSet:
    pool = train_splits(series, split_spec)
    return ModelSet(fit(pool, pooling, cfg=cfg, seed=seed))


def future_temps_for(series: LoadSeries, origin: int, horizon: int) -> np.ndarray:
    """Forecast temperatures for origin+1..origin+horizon from the series."""
    start = series.index_of(origin) + 1
    if start + horizon > len(series):
        raise DataError(f"{series.series}: no temperatures beyond {origin}")
    return series.temperature[start : start + horizon]


def hitsgam_bundles(
    model_set: ModelSet,
    series: list[LoadSeries],
    origins: list[int],
) -> list[ForecastBundle]:
    """Bundles for every (series, origin); vectorized per bank and origin."""
    by_bank: dict[int, list[LoadSeries]] = {}
    for s in series:
        for i, r in enumerate(model_set.results):
            if r.covers(s.series):
                by_bank.setdefault(i, []).append(s)
                break
        else:
            raise ModelError(f"no fitted bank covers {s.series}")

    bundles = []
    for i, members in by_bank.items():
        params = model_set.results[i].params
        data = build_series_data(params, members, pad_hours=params.config.horizon + 1)
        for origin in origins:
            requests = [
                (s.series, origin, s, future_temps_for(s, origin, params.config.horizon))
                for s in members
            ]
            bundles.extend(forecast_many(params, requests, data=data))
    return bundles


def snaive_bundles(series: list[LoadSeries], origins: list[int], horizon: int = 33) -> list[ForecastBundle]:
    out = []
    for s in series:
        for origin in origins:
            values = snaive_forecast(s, origin, horizon)
            out.append(
                ForecastBundle(
                    series=s.series,
                    origin=origin,
                    quantiles=(0.5,),
                    forecast=values[None, :],
                    components=None,
                )
            )
    return out


def knn_bundles(
    series: list[LoadSeries],
    origins: list[int],
    split_spec: SplitSpec,
    cfg: KnnConfig | None = None,
) -> list[ForecastBundle]:
    """Day-ahead kNN bundles (24 target-day hours, step offset 10)."""
    out = []
    for s in series:
        train, _ = split(s, split_spec)
        model = KnnForecaster(train, cfg)
        for origin in origins:
            temps = future_temps_for(s, origin, 33)[9:33]
            values = model.predict(s, origin, temps)
            out.append(
                ForecastBundle(
                    series=s.series,
                    origin=origin,
                    quantiles=(0.5,),
                    forecast=values[None, :],
                    components=None,
                    step_offset=10,
                )
            )
    return out


def reconcile_bundles(
    bundles: list[ForecastBundle],
    hierarchy: Hierarchy,
    method: str,
) -> list[ForecastBundle]:
    """Derived bundles per origin: top_down needs a utility bundle per
    origin, bottom_up/bottom_up_scaled need the full bus set."""
    by_origin: dict[int, list[ForecastBundle]] = {}
    for b in bundles:
        by_origin.setdefault(b.origin, []).append(b)
    out = []
    for origin in sorted(by_origin):
        members = by_origin[origin]
        if method == "top_down":
            utility = [b for b in members if b.series == hierarchy.utility]
            if len(utility) != 1:
                raise DataError(f"top_down needs exactly one utility bundle at {origin}")
            out.extend(top_down(utility[0], hierarchy))
        elif method in ("bottom_up", "bottom_up_scaled"):
            buses = [b for b in members if b.series in hierarchy.buses]
            agg = bottom_up(buses, hierarchy)
            out.append(scale_to_utility(agg, hierarchy) if method == "bottom_up_scaled" else agg)
        else:
            raise DataError(f"unknown reconciliation method {method!r}")
    return out


def eval_origins_for(series: list[LoadSeries], split_spec: SplitSpec) -> list[int]:
    """2 PM origins over the common test window, with full lag coverage."""
    tests = [split(s, split_spec)[1] for s in series]
    origin_sets = [set(select_eval_origins(t)) for t in tests]
    common = set.intersection(*origin_sets) if origin_sets else set()
    return sorted(common)


def hierarchy_from_data(
    utility: LoadSeries, buses: list[LoadSeries], split_spec: SplitSpec
) -> Hierarchy:
    return compute_hierarchy_stats(utility, buses, split_spec)


def aggregate_actuals(buses: list[LoadSeries], utility_id: SeriesId) -> LoadSeries:
    return aggregate_bus_series(buses, utility_id)
