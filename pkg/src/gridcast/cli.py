"""The gridcast command line: synth | ingest | clean | cluster | train |
forecast | evaluate | attribute | serve.

The --config file is JSON with optional sections ``model`` (HitsGamConfig
keys), ``split`` ({"train_fraction": 0.8}), and ``knn`` ({"k": 3}); see the
README key reference.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .baselines import KnnConfig
from .cleaning import clean_all, exclude_unusable
from .clustering import cluster_kmeans
from .diagnostics import attribute_errors, high_error_analysis
from .errors import GridcastError
from .evaluation import evaluate_run
from .features import extract_features
from .hierarchy import Hierarchy
from .io import ingest_csv, read_hierarchy_csv, write_csv, write_hierarchy_csv
from .model import HitsGamConfig
from .model.forecast import ForecastBundle
from .pipeline import (
    ModelSet,
    dataset_split_spec,
    eval_origins_for,
    hierarchy_from_data,
    hitsgam_bundles,
    knn_bundles,
    reconcile_bundles,
    snaive_bundles,
)
from .series import Level, LoadSeries, SeriesId, format_hour, parse_hour
from .service import ServiceDataset, create_app
from .store import ForecastStore
from .synth import SynthSpec, generate
from .training import PoolingMode, PoolingSpec


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _model_config(config: dict) -> HitsGamConfig:
    return HitsGamConfig.from_dict(config.get("model", {}))


def _train_fraction(config: dict, override: float | None) -> float:
    if override is not None:
        return override
    return float(config.get("split", {}).get("train_fraction", 0.8))


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        click.echo(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _load_level(path: str, level: str) -> list[LoadSeries]:
    return ingest_csv(path, Level(level))


def _load_bundles(path: str) -> list[ForecastBundle]:
    payload = json.loads(Path(path).read_text())
    return [ForecastBundle.from_json_dict(d) for d in payload["bundles"]]


def _dump_bundles(path: str, bundles: list[ForecastBundle]) -> None:
    payload = {"bundles": [b.to_json_dict() for b in bundles]}
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")))


@click.group()
def main() -> None:
    """Multi-level day-ahead load forecasting."""


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True), help="SynthSpec JSON file.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the spec seed.")
def synth(spec_path, out_dir, seed) -> None:
    """Generate the synthetic two-level dataset."""
    spec_dict = json.loads(Path(spec_path).read_text()) if spec_path else {}
    if seed is not None:
        spec_dict["seed"] = seed
    spec = SynthSpec.from_dict(spec_dict)
    data = generate(spec)
    out = Path(out_dir)
    write_csv(out / "bus_loads.csv", data.buses)
    write_csv(out / "utility_load.csv", [data.utility])
    write_hierarchy_csv(out / "hierarchy.csv", {data.utility.series.id: data.hierarchy_map["utility"]})
    _write_json(str(out / "ground_truth.json"), data.truth.to_json_dict())
    click.echo(f"wrote {len(data.buses)} buses + utility over {spec.hours} hours to {out}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def ingest(input_path, level, out_path) -> None:
    """Parse a load CSV and report per-series coverage."""
    series = _load_level(input_path, level)
    payload = {
        "level": level,
        "series": [
            {
                "id": s.series.id,
                "start": format_hour(s.start),
                "hours": len(s),
                "missing": s.n_missing(),
            }
            for s in series
        ],
    }
    _write_json(out_path, payload)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--train-fraction", type=float, default=None)
def clean(input_path, level, out_path, report_path, config_path, train_fraction) -> None:
    """Exclude unusable series, then impute outliers and gaps."""
    config = _read_config(config_path)
    fraction = _train_fraction(config, train_fraction)
    series = _load_level(input_path, level)
    split_spec = dataset_split_spec(series, fraction)
    kept, dropped = exclude_unusable(series, split_spec)
    cleaned, report = clean_all(kept)
    write_csv(out_path, cleaned)
    payload = report.to_json_dict()
    payload["dropped"] = [d.to_dict() for d in dropped]
    payload["train_boundary"] = format_hour(split_spec.boundary)
    _write_json(report_path, payload)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), default="bus")
@click.option("--k", type=int, default=3)
@click.option("--seed", type=int, default=42)
@click.option("--out", "out_path", type=click.Path(), default=None)
def cluster(input_path, level, k, seed, out_path) -> None:
    """Extract the 12 features and group series with k-means."""
    series = _load_level(input_path, level)
    feats = {s.series: extract_features(s) for s in series}
    assignment = cluster_kmeans(feats, k=k, seed=seed)
    payload = assignment.to_json_dict()
    payload["features"] = {s.id: feats[s].to_dict() for s in sorted(feats)}
    _write_json(out_path, payload)


@main.command()
@click.option("--mode", type=click.Choice(["local", "global", "grouped"]), required=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), required=True)
@click.option("--groups", "groups_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--train-fraction", type=float, default=None)
def train(mode, input_path, level, groups_path, config_path, seed, out_path, report_path, train_fraction) -> None:
    """Fit hits-GAM under the chosen pooling paradigm."""
    from .pipeline import train_model_set

    config = _read_config(config_path)
    cfg = _model_config(config)
    fraction = _train_fraction(config, train_fraction)
    series = _load_level(input_path, level)
    split_spec = dataset_split_spec(series, fraction)

    groups = None
    if mode == "grouped":
        if groups_path is None:
            raise click.UsageError("--groups is required for grouped mode")
        feats = {s.series: extract_features(s) for s in series}
        loaded = json.loads(Path(groups_path).read_text())
        from .clustering import GroupAssignment

        groups = GroupAssignment(
            groups={SeriesId(sid, Level(level)): g for sid, g in loaded["groups"].items()},
            centroids=np.asarray(loaded["centroids"]),
            seed=loaded["seed"],
            inertia=loaded["inertia"],
            feature_means=np.asarray(loaded["feature_means"]),
            feature_stds=np.asarray(loaded["feature_stds"]),
        )
        del feats
    pooling = PoolingSpec(PoolingMode(mode), groups)
    model_set = train_model_set(series, split_spec, pooling, cfg=cfg, seed=seed)
    model_set.save(out_path)
    from .training import training_report

    report = training_report(model_set.results)
    report["train_boundary"] = format_hour(split_spec.boundary)
    _write_json(report_path, report)


@main.command()
@click.option("--model", type=click.Choice(["snaive", "knn", "hitsgam"]), required=True)
@click.option("--artifact", "artifact_path", type=click.Path(exists=True), default=None)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), required=True)
@click.option("--origins", default="eval", help='"eval" or comma-separated timestamps.')
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--reconcile", "reconcile_method", type=click.Choice(["none", "top_down", "bottom_up", "bottom_up_scaled"]), default="none")
@click.option("--hierarchy", "hierarchy_path", type=click.Path(exists=True), default=None)
@click.option("--utility-input", "utility_input_path", type=click.Path(exists=True), default=None)
@click.option("--bus-input", "bus_input_path", type=click.Path(exists=True), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--train-fraction", type=float, default=None)
@click.option("--store", "store_dir", type=click.Path(), default=None)
@click.option("--model-tag", default=None)
def forecast(model, artifact_path, input_path, level, origins, out_path, reconcile_method, hierarchy_path, utility_input_path, bus_input_path, config_path, train_fraction, store_dir, model_tag) -> None:
    """Produce day-ahead bundles (optionally reconciled and published)."""
    config = _read_config(config_path)
    fraction = _train_fraction(config, train_fraction)
    series = _load_level(input_path, level)
    split_spec = dataset_split_spec(series, fraction)

    if origins == "eval":
        origin_hours = eval_origins_for(series, split_spec)
    else:
        origin_hours = [parse_hour(tok) for tok in origins.split(",")]
    if not origin_hours:
        raise click.UsageError("no usable forecast origins")

    if model == "hitsgam":
        if artifact_path is None:
            raise click.UsageError("--artifact is required for hitsgam")
        model_set = ModelSet.load(artifact_path)
        bundles = hitsgam_bundles(model_set, series, origin_hours)
    elif model == "snaive":
        bundles = snaive_bundles(series, origin_hours)
    else:
        knn_cfg = KnnConfig(**config.get("knn", {}))
        bundles = knn_bundles(series, origin_hours, split_spec, knn_cfg)

    if reconcile_method != "none":
        hierarchy = _resolve_hierarchy(
            hierarchy_path, series, level, utility_input_path, bus_input_path, split_spec
        )
        bundles = bundles + reconcile_bundles(bundles, hierarchy, reconcile_method)

    _dump_bundles(out_path, bundles)
    if store_dir is not None:
        store = ForecastStore(store_dir)
        tag = model_tag or model
        for b in bundles:
            store.publish(b, tag)
    click.echo(f"wrote {len(bundles)} bundles for {len(origin_hours)} origins")


def _resolve_hierarchy(hierarchy_path, series, level, utility_input_path, bus_input_path, split_spec) -> Hierarchy:
    """Hierarchy statistics need both levels: the one being forecast plus
    its counterpart from --utility-input / --bus-input."""
    if hierarchy_path is None:
        raise click.UsageError("--hierarchy is required for reconciliation")
    mapping = read_hierarchy_csv(hierarchy_path)
    if len(mapping) != 1:
        raise click.UsageError("exactly one utility expected in the hierarchy file")
    (utility_id,) = mapping
    bus_ids = mapping[utility_id]
    if level == "bus":
        by_id = {s.series.id: s for s in series}
        buses = [by_id[b] for b in bus_ids if b in by_id]
        if utility_input_path is None:
            raise click.UsageError("--utility-input is required to compute hierarchy statistics")
        (utility_series,) = ingest_csv(utility_input_path, Level.UTILITY)
    else:
        if bus_input_path is None:
            raise click.UsageError("--bus-input is required to compute hierarchy statistics")
        by_id = {s.series.id: s for s in ingest_csv(bus_input_path, Level.BUS)}
        buses = [by_id[b] for b in bus_ids if b in by_id]
        matches = [s for s in series if s.series.id == utility_id]
        if not matches:
            raise click.UsageError(f"utility {utility_id!r} not present in --input")
        (utility_series,) = matches
    if not buses:
        raise click.UsageError("no hierarchy buses found in the bus data")
    return hierarchy_from_data(utility_series, buses, split_spec)


@main.command()
@click.option("--forecasts", "forecasts_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--level", type=click.Choice(["utility", "bus"]), required=True)
@click.option("--ground-truth", type=click.Choice(["utility", "agg-bus"]), default="utility")
@click.option("--bus-input", "bus_input_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.option("--weighted", is_flag=True, default=False)
def evaluate(forecasts_path, input_path, level, ground_truth, bus_input_path, out_path, csv_path, weighted) -> None:
    """Score stored bundles against actuals on target-day hours."""
    bundles = _load_bundles(forecasts_path)
    eval_level = Level(level)
    bundles = [b for b in bundles if b.series.level is eval_level]
    if not bundles:
        raise click.UsageError(f"no {level}-level bundles in {forecasts_path}")

    if ground_truth == "agg-bus":
        if bus_input_path is None:
            raise click.UsageError("--bus-input is required for agg-bus ground truth")
        buses = _load_level(bus_input_path, "bus")
        utility_ids = {b.series for b in bundles}
        actuals = {}
        from .pipeline import aggregate_actuals

        for uid in utility_ids:
            actuals[uid] = aggregate_actuals(buses, uid)
    else:
        series = _load_level(input_path, level)
        actuals = {s.series: s for s in series}

    report = evaluate_run(bundles, actuals, weighted=weighted)
    _write_json(out_path, report.to_json_dict())
    if csv_path is not None:
        Path(csv_path).write_text(report.to_csv_table())


@main.command()
@click.option("--forecasts", "forecasts_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--hierarchy", "hierarchy_path", required=True, type=click.Path(exists=True))
@click.option("--utility-input", "utility_input_path", type=click.Path(exists=True), default=None)
@click.option("--origin-range", default=None, help='"FROM,TO" timestamps bounding the forecast origins.')
@click.option("--top-n", type=int, default=5)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--high-error-out", type=click.Path(), default=None)
@click.option("--plot-data", "plot_path", type=click.Path(), default=None)
@click.option("--train-fraction", type=float, default=0.8)
def attribute(forecasts_path, input_path, hierarchy_path, utility_input_path, origin_range, top_n, out_path, high_error_out, plot_path, train_fraction) -> None:
    """Attribute utility-level errors to buses over stored bus bundles."""
    bundles = [b for b in _load_bundles(forecasts_path) if b.series.level is Level.BUS]
    if origin_range is not None:
        try:
            lo_text, hi_text = origin_range.split(",")
        except ValueError:
            raise click.UsageError('--origin-range expects "FROM,TO"') from None
        lo, hi = parse_hour(lo_text), parse_hour(hi_text)
        bundles = [b for b in bundles if lo <= b.origin <= hi]
    if not bundles:
        raise click.UsageError("no bus bundles in the requested origin range")
    buses = _load_level(input_path, "bus")
    actuals = {s.series: s for s in buses}
    mapping = read_hierarchy_csv(hierarchy_path)
    (utility_id,) = mapping
    split_spec = dataset_split_spec(buses, train_fraction)
    if utility_input_path is not None:
        (utility_series,) = ingest_csv(utility_input_path, Level.UTILITY)
    else:
        from .pipeline import aggregate_actuals

        utility_series = aggregate_actuals(buses, SeriesId(utility_id, Level.UTILITY))
    hierarchy = hierarchy_from_data(
        utility_series, [actuals[SeriesId(b, Level.BUS)] for b in mapping[utility_id]], split_spec
    )
    result = attribute_errors(bundles, actuals, hierarchy, top_n=top_n)
    _write_json(out_path, result.to_json_dict())
    if high_error_out is not None:
        pos, neg = high_error_analysis(result)
        _write_json(high_error_out, {"positive": pos.to_json_dict(), "negative": neg.to_json_dict()})
    if plot_path is not None:
        # per-hour residual bars plus the utility line (Fig-6 shape)
        lines = ["timestamp,utility_residual_mw,remainder_residual_mw"]
        header_buses = [s.id for s in result.top_buses]
        lines[0] += "," + ",".join(header_buses)
        for row in result.rows:
            cells = [format_hour(row.hour), f"{row.utility_residual:.6f}", f"{row.remainder_residual:.6f}"]
            cells += [f"{row.bus_residuals[s]:.6f}" for s in result.top_buses]
            lines.append(",".join(cells))
        Path(plot_path).write_text("\n".join(lines) + "\n")
        # per-bus share profile companion (Fig-7 shape)
        pos, neg = high_error_analysis(result)
        profile_path = Path(plot_path).with_name(Path(plot_path).stem + "_profiles.csv")
        lines = ["direction,bus,bias_share,mae_share,overall_mae_share,overall_load_share"]
        for profile in (pos, neg):
            for sid in sorted(profile.bias_share):
                lines.append(
                    f"{profile.direction},{sid.id},{profile.bias_share[sid]:.6f},"
                    f"{profile.mae_share[sid]:.6f},{profile.overall_mae_share[sid]:.6f},"
                    f"{profile.overall_load_share[sid]:.6f}"
                )
        profile_path.write_text("\n".join(lines) + "\n")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path())
@click.option("--data", "data_path", type=click.Path(exists=True), default=None)
@click.option("--utility-data", "utility_data_path", type=click.Path(exists=True), default=None)
@click.option("--hierarchy", "hierarchy_path", type=click.Path(exists=True), default=None)
@click.option("--model-tag", default="hitsgam")
@click.option("--train-fraction", type=float, default=0.8)
@click.option("--ui", "ui_dir", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(store_dir, data_path, utility_data_path, hierarchy_path, model_tag, train_fraction, ui_dir, host, port) -> None:
    """Run the operator HTTP service over a forecast store."""
    import uvicorn

    store = ForecastStore(store_dir)
    actuals = {}
    hierarchies = {}
    buses = []
    if data_path is not None:
        buses = _load_level(data_path, "bus")
        actuals.update({s.series: s for s in buses})
    utility_series = None
    if utility_data_path is not None:
        (utility_series,) = ingest_csv(utility_data_path, Level.UTILITY)
        actuals[utility_series.series] = utility_series
    if hierarchy_path is not None and buses:
        mapping = read_hierarchy_csv(hierarchy_path)
        split_spec = dataset_split_spec(buses, train_fraction)
        by_id = {s.series.id: s for s in buses}
        for uid, bus_ids in mapping.items():
            members = [by_id[b] for b in bus_ids if b in by_id]
            if utility_series is not None and utility_series.series.id == uid:
                top = utility_series
            else:
                from .pipeline import aggregate_actuals

                top = aggregate_actuals(members, SeriesId(uid, Level.UTILITY))
                actuals.setdefault(top.series, top)
            hierarchies[uid] = hierarchy_from_data(top, members, split_spec)
    dataset = ServiceDataset(actuals=actuals, hierarchies=hierarchies, model_tag=model_tag)
    app = create_app(store, dataset, static_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


def entrypoint() -> None:
    try:
        main(standalone_mode=True)
    except GridcastError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
