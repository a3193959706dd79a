#!/usr/bin/env python3
"""End-to-end demo: synthesize data, train, forecast, evaluate, and fill a
forecast store that `gridcast serve` (and the dashboard) can run against.

Usage:
    python scripts/run_pipeline.py [workdir] [--full]

The default settings are sized for a quick demo (~1 minute). --full uses
the paper-default 30-epoch configuration on the 20-bus/2-year dataset
(roughly ten minutes).
"""

import json
import subprocess
import sys
from pathlib import Path

QUICK_SYNTH = {"n_buses": 6, "hours": 24 * 120, "seed": 42, "proportion_drift": 0.2}
QUICK_MODEL = {
    "model": {
        "n_lags": 120,
        "horizon": 33,
        "quantiles": [0.01, 0.5, 0.99],
        "yearly_order": 3,
        "weekly_order": 3,
        "daily_order": 6,
        "ar_layers": [32, 16],
        "lagged_reg_layers": [16],
        "batch_size": 128,
        "epochs": 8,
    },
    "split": {"train_fraction": 0.8},
}
FULL_SYNTH = {"n_buses": 20, "hours": 2 * 8760, "seed": 42, "proportion_drift": 0.35}
FULL_MODEL = {"model": {}, "split": {"train_fraction": 0.8}}


def run(args: list[str]) -> None:
    print("+", " ".join(args))
    subprocess.check_call(args)


def main() -> None:
    args = [a for a in sys.argv[1:] if not a.startswith("--")]
    full = "--full" in sys.argv
    root = Path(args[0]) if args else Path("demo_run")
    root.mkdir(parents=True, exist_ok=True)
    (root / "synth_spec.json").write_text(json.dumps(FULL_SYNTH if full else QUICK_SYNTH, indent=2))
    (root / "config.json").write_text(json.dumps(FULL_MODEL if full else QUICK_MODEL, indent=2))
    gc = [sys.executable, "-m", "gridcast.cli"]

    run(gc + ["synth", "--spec", str(root / "synth_spec.json"), "--out", str(root / "data")])
    if full:
        # the quick dataset is too short for the one-year exclusion rule
        run(gc + ["clean", "--input", str(root / "data/bus_loads.csv"), "--level", "bus",
                  "--out", str(root / "clean_bus.csv"), "--report", str(root / "clean_report.json"),
                  "--train-fraction", "0.8"])
    bus_csv = str(root / ("clean_bus.csv" if full else "data/bus_loads.csv"))
    run(gc + ["cluster", "--input", bus_csv, "--k", "3", "--seed", "42",
              "--out", str(root / "groups.json")])
    run(gc + ["train", "--mode", "global", "--input", bus_csv, "--level", "bus",
              "--config", str(root / "config.json"), "--seed", "1",
              "--out", str(root / "model.json"), "--report", str(root / "train_report.json")])
    run(gc + ["forecast", "--model", "hitsgam", "--artifact", str(root / "model.json"),
              "--input", bus_csv, "--level", "bus", "--config", str(root / "config.json"),
              "--reconcile", "bottom_up", "--hierarchy", str(root / "data/hierarchy.csv"),
              "--utility-input", str(root / "data/utility_load.csv"),
              "--out", str(root / "forecasts.json"),
              "--store", str(root / "store"), "--model-tag", "hitsgam"])
    run(gc + ["evaluate", "--forecasts", str(root / "forecasts.json"), "--input", bus_csv,
              "--level", "bus", "--out", str(root / "metrics_bus.json"),
              "--csv", str(root / "metrics_bus.csv")])
    run(gc + ["evaluate", "--forecasts", str(root / "forecasts.json"),
              "--input", str(root / "data/utility_load.csv"), "--level", "utility",
              "--ground-truth", "agg-bus", "--bus-input", bus_csv,
              "--out", str(root / "metrics_utility.json")])
    run(gc + ["attribute", "--forecasts", str(root / "forecasts.json"), "--input", bus_csv,
              "--hierarchy", str(root / "data/hierarchy.csv"),
              "--utility-input", str(root / "data/utility_load.csv"), "--top-n", "5",
              "--out", str(root / "attribution.json"),
              "--high-error-out", str(root / "high_error.json"),
              "--plot-data", str(root / "attribution.csv")])

    print()
    metrics = json.loads((root / "metrics_utility.json").read_text())
    print("utility-aggregate metrics:", json.dumps(metrics["aggregate"], indent=2))
    print()
    print("serve the dashboard with:")
    print(f"  gridcast serve --store {root}/store --data {bus_csv} "
          f"--utility-data {root}/data/utility_load.csv --hierarchy {root}/data/hierarchy.csv "
          f"--ui frontend/dist --port 8000")


if __name__ == "__main__":
    main()
