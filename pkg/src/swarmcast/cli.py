"""Command-line front end for reproducible batch runs.

Commands: ingest, tune, train, forecast, evaluate, compare, bench-opt.
Every command resolves its options as defaults < JSON config < explicit
flags, writes its artifacts under one output directory together with a
manifest (config hash, seed, versions), and is byte-for-byte
reproducible for a fixed seed. The default config path can be set via
the SWARMCAST_CONFIG environment variable.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
divergence or a degenerate objective.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import platform
import sys
from datetime import timedelta
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DataError,
    DegenerateObjectiveError,
    DivergedError,
    SwarmcastError,
)
from .benchmarks import BENCHMARKS
from .evaluation import compare_methods, metric_report, parse_score_csv
from .metaheuristics import OPTIMIZERS, OptimizerParams, SearchBounds
from .network import (
    NetworkConfig,
    TrainingConfig,
    initialize_network,
    iterative_forecast,
    load_model,
    predict_windows,
    save_model,
    train,
)
from .timeseries import ScalingParams, apply_scale, impute_missing, inverse_scale, load_csv, make_windows
from .tuning import (
    DEFAULT_SPACE,
    EXTENDED_SPACE,
    HyperparamAssignment,
    HyperparamSpace,
    derive_seed,
    tune_series,
)

ARCHITECTURE_DIMENSIONS = ("n_filters", "kernel_size", "pool_size", "lstm_units")

CONFIG_ENV_VAR = "SWARMCAST_CONFIG"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(canonical_json(obj), encoding="utf-8")


def write_csv_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return doc


def resolve_options(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags; unknown config keys ignored."""
    config = _load_config_file(getattr(args, "config", None))
    resolved = dict(defaults)
    for key in defaults:
        if key in config:
            resolved[key] = config[key]
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def prepare_output_dir(command: str, options: dict) -> tuple[Path, dict]:
    """Pick the output directory and build the manifest for this run."""
    hashed = {k: v for k, v in options.items() if k != "output_dir"}
    digest = hashlib.sha256(canonical_json(hashed).encode("utf-8")).hexdigest()
    if options.get("output_dir"):
        out_dir = Path(options["output_dir"])
    else:
        out_dir = Path(options.get("output_root", "runs")) / f"{command}-{digest[:12]}"
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": hashed,
        "config_sha256": digest,
        "seed": options.get("seed"),
        "versions": {
            "swarmcast": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    return out_dir, manifest


def _parse_variables(raw) -> dict[str, str] | None:
    if raw is None:
        return None
    if isinstance(raw, dict):
        return {str(k): str(v) for k, v in raw.items()}
    if isinstance(raw, str):
        raw = [name.strip() for name in raw.split(",") if name.strip()]
    return {name: name for name in raw}


# ---------------------------------------------------------------- ingest

INGEST_DEFAULTS = {
    "data": None,
    "date_column": "date",
    "variables": None,
    "region": None,
    "split_ratio": 0.8,
    "seed": 0,
    "output_root": "runs",
    "output_dir": None,
}


def cmd_ingest(args) -> int:
    options = resolve_options(args, INGEST_DEFAULTS)
    if not options["data"]:
        raise ConfigError("ingest needs --data (or a 'data' config entry)")
    ratio = float(options["split_ratio"])
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split_ratio must be in (0, 1), got {ratio}")

    dataset = load_csv(
        options["data"],
        date_column=options["date_column"],
        variable_columns=_parse_variables(options["variables"]),
        region_id=options["region"],
    )
    n = len(dataset)
    cut = math.floor(ratio * n)
    if cut < 1 or cut >= n:
        raise DataError(f"split_ratio {ratio} leaves an empty split for {n} rows")

    out_dir, manifest = prepare_output_dir("ingest", options)
    scaled = {}
    variable_meta = {}
    total_imputed = 0
    for name in dataset.variable_names:
        raw = dataset.series(name)
        missing = int(np.isnan(raw).sum())
        total_imputed += missing
        filled = impute_missing(raw)
        lo, hi = float(filled[:cut].min()), float(filled[:cut].max())
        params = ScalingParams(lo, hi, degenerate=hi == lo)
        scaled[name] = apply_scale(filled, params)
        variable_meta[name] = {
            "minimum": params.minimum,
            "maximum": params.maximum,
            "degenerate": params.degenerate,
            "imputed": missing,
        }

    names = dataset.variable_names
    rows = [
        [day.isoformat()] + [repr(float(scaled[name][i])) for name in names]
        for i, day in enumerate(dataset.dates)
    ]
    write_csv_rows(out_dir / "dataset.csv", ["date"] + names, rows)
    write_json(out_dir / "scaling.json", {
        "region_id": dataset.region_id,
        "n_rows": n,
        "split_ratio": ratio,
        "split_index": cut,
        "variables": variable_meta,
    })
    write_json(out_dir / "manifest.json", manifest)

    print(f"rows: {n} ({dataset.dates[0]} .. {dataset.dates[-1]})")
    print(f"imputed: {total_imputed}")
    print(f"split: train {cut} / test {n - cut}")
    print(f"artifact: {out_dir}")
    return 0


def read_artifact(data_dir) -> dict:
    """Load an ingest artifact back into memory (scaled values)."""
    data_dir = Path(data_dir)
    scaling_path = data_dir / "scaling.json"
    dataset_path = data_dir / "dataset.csv"
    if not scaling_path.exists() or not dataset_path.exists():
        raise DataError(f"{data_dir} is not an ingest artifact")
    meta = json.loads(scaling_path.read_text(encoding="utf-8"))
    dataset = load_csv(dataset_path, region_id=meta.get("region_id"))
    return {
        "dates": dataset.dates,
        "variables": {name: dataset.series(name) for name in dataset.variable_names},
        "meta": meta,
    }


def _target_series(artifact: dict, variable: str | None) -> tuple[str, np.ndarray, ScalingParams]:
    names = list(artifact["variables"])
    name = variable or names[0]
    if name not in artifact["variables"]:
        raise ConfigError(f"unknown variable {name!r}; artifact has {names}")
    var_meta = artifact["meta"]["variables"][name]
    params = ScalingParams(
        var_meta["minimum"], var_meta["maximum"], degenerate=var_meta["degenerate"]
    )
    return name, artifact["variables"][name], params


# ------------------------------------------------------------------ tune

TUNE_DEFAULTS = {
    "data_dir": None,
    "variable": None,
    "algorithm": "rs-gwo-woa",
    "population": 10,
    "iterations": 10,
    "seed": 0,
    "lookback": 7,
    "horizon": 1,
    "val_fraction": 0.2,
    "fitness_epochs": 20,
    "learning_rate": 1e-3,
    "optimizer": "adam",
    "repeat_steps": 3,
    "conv_activation": "relu",
    "surrogate": None,
    "extended_space": False,
    "space": None,
    "evaluation_budget": None,
    "output_root": "runs",
    "output_dir": None,
}


def _resolve_space(options) -> HyperparamSpace:
    override = options["space"]
    if override is None:
        return EXTENDED_SPACE if options["extended_space"] else DEFAULT_SPACE
    if not isinstance(override, dict) or not override:
        raise ConfigError("config 'space' must map dimension name -> candidate list")
    missing = [d for d in ARCHITECTURE_DIMENSIONS if d not in override]
    if missing:
        raise ConfigError(f"custom space must keep the architecture dimensions; missing {missing}")
    return HyperparamSpace(
        tuple((name, tuple(values)) for name, values in override.items())
    )


def cmd_tune(args) -> int:
    options = resolve_options(args, TUNE_DEFAULTS)
    if not options["data_dir"]:
        raise ConfigError("tune needs --data-dir pointing at an ingest artifact")
    artifact = read_artifact(options["data_dir"])
    name, series, _ = _target_series(artifact, options["variable"])
    cut = artifact["meta"]["split_index"]
    space = _resolve_space(options)

    params = OptimizerParams(
        population_size=int(options["population"]),
        max_iterations=int(options["iterations"]),
        seed=int(options["seed"]),
    )
    result = tune_series(
        series[:cut],
        options["algorithm"],
        params,
        space,
        lookback=int(options["lookback"]),
        horizon=int(options["horizon"]),
        val_fraction=float(options["val_fraction"]),
        fitness_epochs=int(options["fitness_epochs"]),
        global_seed=int(options["seed"]),
        repeat_steps=int(options["repeat_steps"]),
        conv_activation=options["conv_activation"],
        learning_rate=float(options["learning_rate"]),
        optimizer=options["optimizer"],
        surrogate=options["surrogate"],
        evaluation_budget=(
            int(options["evaluation_budget"])
            if options["evaluation_budget"] is not None
            else None
        ),
    )

    out_dir, manifest = prepare_output_dir("tune", options)
    # wall times go to a side file so the report stays byte-reproducible
    write_json(out_dir / "report.json", {
        "algorithm": result.algorithm,
        "variable": name,
        "best_assignment": result.best_assignment.values,
        "best_loss": result.best_loss,
        "cache_hits": result.cache_hits,
        "cache_misses": result.cache_misses,
        "evaluation_log": [
            {"assignment": record.values, "loss": record.loss}
            for record in result.records
        ],
        "lookback": int(options["lookback"]),
        "horizon": int(options["horizon"]),
        "seed": int(options["seed"]),
    })
    write_csv_rows(
        out_dir / "trace.csv",
        ["iteration", "best_fitness"],
        [[i, repr(v)] for i, v in enumerate(result.trace.best_fitness_per_iteration)],
    )
    write_csv_rows(
        out_dir / "timings.csv",
        ["evaluation", "wall_time_seconds"],
        [[i, f"{record.wall_time:.6f}"] for i, record in enumerate(result.records)],
    )
    write_json(out_dir / "manifest.json", manifest)
    print(f"best assignment: {result.best_assignment.values}")
    print(f"best loss: {result.best_loss}")
    print(f"report: {out_dir / 'report.json'}")
    return 0


# ----------------------------------------------------------------- train

TRAIN_DEFAULTS = {
    "data_dir": None,
    "variable": None,
    "from_tuning": None,
    "n_filters": 32,
    "kernel_size": 3,
    "pool_size": 2,
    "lstm_units": 10,
    "repeat_steps": 3,
    "conv_activation": "relu",
    "lookback": 7,
    "horizon": 1,
    "epochs": 100,
    "learning_rate": 1e-3,
    "optimizer": "adam",
    "seed": 0,
    "output_root": "runs",
    "output_dir": None,
}


def _assignment_from_options(options) -> dict:
    if options["from_tuning"]:
        try:
            report = json.loads(Path(options["from_tuning"]).read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read tuning report: {exc}") from exc
        return dict(report["best_assignment"])
    return {
        "n_filters": int(options["n_filters"]),
        "kernel_size": int(options["kernel_size"]),
        "pool_size": int(options["pool_size"]),
        "lstm_units": int(options["lstm_units"]),
    }


def cmd_train(args) -> int:
    options = resolve_options(args, TRAIN_DEFAULTS)
    if not options["data_dir"]:
        raise ConfigError("train needs --data-dir pointing at an ingest artifact")
    artifact = read_artifact(options["data_dir"])
    name, series, _ = _target_series(artifact, options["variable"])
    cut = artifact["meta"]["split_index"]
    values = _assignment_from_options(options)
    assignment = HyperparamAssignment(values)
    derived = derive_seed(int(options["seed"]), assignment)

    epochs = int(values.get("epochs", options["epochs"]))
    learning_rate = float(values.get("learning_rate", options["learning_rate"]))
    config = NetworkConfig(
        n_filters=int(values["n_filters"]),
        kernel_size=int(values["kernel_size"]),
        pool_size=int(values["pool_size"]),
        lstm_units=int(values["lstm_units"]),
        repeat_steps=int(options["repeat_steps"]),
        n_features=1,
        horizon=int(options["horizon"]),
        conv_activation=options["conv_activation"],
        seed=derived,
    )
    training_cfg = TrainingConfig(
        epochs=epochs,
        learning_rate=learning_rate,
        optimizer=options["optimizer"],
        seed=derived + 1,
    )
    windows = make_windows(series[:cut], int(options["lookback"]), config.horizon)
    net = initialize_network(config, int(options["lookback"]))
    trained = train(net, windows, training_cfg)

    out_dir, manifest = prepare_output_dir("train", options)
    save_model(trained, out_dir / "model.json")
    write_json(out_dir / "manifest.json", manifest)
    print(f"variable: {name}")
    print(f"assignment: {values}")
    print(f"final epoch mse: {trained.loss_history[-1]}")
    print(f"model: {out_dir / 'model.json'}")
    return 0


# -------------------------------------------------------------- forecast

FORECAST_DEFAULTS = {
    "data_dir": None,
    "model": None,
    "variable": None,
    "steps": 7,
    "output_root": "runs",
    "output_dir": None,
}


def cmd_forecast(args) -> int:
    options = resolve_options(args, FORECAST_DEFAULTS)
    if not options["model"]:
        raise ConfigError("forecast needs --model")
    if not options["data_dir"]:
        raise ConfigError("forecast needs --data-dir")
    steps = int(options["steps"])
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    model_path = Path(options["model"])
    if not model_path.exists():
        raise DataError(f"model file {model_path} does not exist")
    net = load_model(model_path)
    artifact = read_artifact(options["data_dir"])
    name, series, params = _target_series(artifact, options["variable"])

    values = iterative_forecast(net, series, steps, params)
    last_day = artifact["dates"][-1]
    rows = [
        [(last_day + timedelta(days=i + 1)).isoformat(), repr(float(v))]
        for i, v in enumerate(values)
    ]
    out_dir, manifest = prepare_output_dir("forecast", options)
    write_csv_rows(out_dir / "forecast.csv", ["date", "predicted"], rows)
    write_json(out_dir / "manifest.json", manifest)
    print(f"variable: {name}")
    print(f"forecast: {out_dir / 'forecast.csv'} ({steps} steps)")
    return 0


# -------------------------------------------------------------- evaluate

EVALUATE_DEFAULTS = {
    "data_dir": None,
    "model": None,
    "variable": None,
    "output_root": "runs",
    "output_dir": None,
}


def cmd_evaluate(args) -> int:
    options = resolve_options(args, EVALUATE_DEFAULTS)
    if not options["model"] or not options["data_dir"]:
        raise ConfigError("evaluate needs --model and --data-dir")
    net = load_model(options["model"])
    artifact = read_artifact(options["data_dir"])
    name, series, params = _target_series(artifact, options["variable"])
    cut = artifact["meta"]["split_index"]
    lookback, horizon = net.lookback, net.config.horizon

    windows = make_windows(series, lookback, horizon)
    test_idx = [i for i in range(len(windows)) if i + lookback >= cut]
    if not test_idx:
        raise DataError("test segment too short for the model's lookback/horizon")
    from .timeseries import WindowedSamples

    test_windows = WindowedSamples(
        inputs=windows.inputs[test_idx],
        targets=windows.targets[test_idx],
        lookback=lookback,
        horizon=horizon,
    )
    predicted = predict_windows(net, test_windows)
    actual = test_windows.targets[:, :, 0]

    scaled_report = metric_report(predicted.ravel(), actual.ravel())
    predicted_units = inverse_scale(predicted.ravel(), params)
    actual_units = inverse_scale(actual.ravel(), params)
    units_report = metric_report(predicted_units, actual_units)

    rows = []
    for row, i in enumerate(test_idx):
        for step in range(horizon):
            day = artifact["dates"][i + lookback + step]
            rows.append([
                day.isoformat(),
                step + 1,
                repr(float(inverse_scale([actual[row, step]], params)[0])),
                repr(float(inverse_scale([predicted[row, step]], params)[0])),
            ])

    out_dir, manifest = prepare_output_dir("evaluate", options)
    write_json(out_dir / "metrics.json", {
        "variable": name,
        "n_windows": len(test_idx),
        "scaled": {
            "mae": scaled_report.mae,
            "mse": scaled_report.mse,
            "r_squared": scaled_report.r_squared,
            "n": scaled_report.n,
        },
        "original_units": {
            "mae": units_report.mae,
            "mse": units_report.mse,
            "r_squared": units_report.r_squared,
            "n": units_report.n,
        },
    })
    write_csv_rows(out_dir / "predictions.csv", ["date", "step", "actual", "predicted"], rows)
    write_json(out_dir / "manifest.json", manifest)
    print(f"variable: {name}")
    print(f"test mse (scaled): {scaled_report.mse}")
    print(f"metrics: {out_dir / 'metrics.json'}")
    return 0


# --------------------------------------------------------------- compare

COMPARE_DEFAULTS = {
    "scores": None,
    "alpha": 0.05,
    "q": None,
    "output_root": "runs",
    "output_dir": None,
}


def cmd_compare(args) -> int:
    options = resolve_options(args, COMPARE_DEFAULTS)
    if not options["scores"]:
        raise ConfigError("compare needs --scores CSV")
    tests, methods, matrix = parse_score_csv(options["scores"])
    result = compare_methods(
        matrix,
        methods=methods,
        tests=tests,
        alpha=float(options["alpha"]),
        q=float(options["q"]) if options["q"] is not None else None,
    )
    out_dir, manifest = prepare_output_dir("compare", options)
    write_json(out_dir / "comparison.json", result.to_dict())
    write_csv_rows(
        out_dir / "cd_diagram.csv",
        ["method", "average_rank"],
        [[m, repr(float(r))] for m, r in zip(result.methods, result.average_ranks)],
    )
    write_json(out_dir / "manifest.json", manifest)
    print(f"friedman statistic: {result.friedman.statistic}")
    print(f"critical value (chi-square, alpha={result.friedman.alpha}): "
          f"{result.friedman.critical_value}")
    print(f"null rejected: {result.friedman.reject}")
    print(f"critical difference: {result.cd}")
    print(f"comparison: {out_dir / 'comparison.json'}")
    return 0


# -------------------------------------------------------------- bench-opt

BENCH_DEFAULTS = {
    "function": "sphere",
    "algorithm": "rs-gwo-woa",
    "dimension": 5,
    "population": 30,
    "iterations": 200,
    "seed": 0,
    "output_root": "runs",
    "output_dir": None,
}


def cmd_bench_opt(args) -> int:
    options = resolve_options(args, BENCH_DEFAULTS)
    name = options["function"]
    if name not in BENCHMARKS:
        raise ConfigError(f"unknown benchmark {name!r}; pick from {sorted(BENCHMARKS)}")
    algorithm = options["algorithm"]
    if algorithm not in OPTIMIZERS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; pick from {sorted(OPTIMIZERS)}")
    objective, (low, high) = BENCHMARKS[name]
    bounds = SearchBounds.cube(low, high, int(options["dimension"]))
    params = OptimizerParams(
        population_size=int(options["population"]),
        max_iterations=int(options["iterations"]),
        seed=int(options["seed"]),
    )
    position, fitness_value, trace = OPTIMIZERS[algorithm](objective, bounds, params)

    out_dir, manifest = prepare_output_dir("bench-opt", options)
    write_json(out_dir / "result.json", {
        "function": name,
        "algorithm": algorithm,
        "dimension": int(options["dimension"]),
        "best_fitness": fitness_value,
        "best_position": [float(v) for v in position],
        "evaluations": trace.evaluations,
        "gwo_iterations": trace.gwo_iterations,
        "woa_iterations": trace.woa_iterations,
    })
    write_csv_rows(
        out_dir / "trace.csv",
        ["iteration", "best_fitness"],
        [[i, repr(v)] for i, v in enumerate(trace.best_fitness_per_iteration)],
    )
    write_json(out_dir / "manifest.json", manifest)
    print(f"{name} d={options['dimension']} via {algorithm}: best {fitness_value}")
    print(f"result: {out_dir / 'result.json'}")
    return 0


# ---------------------------------------------------------------- parser

def _add_common(parser):
    parser.add_argument("--config", help="JSON config file (flags win over it)")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--output-root", dest="output_root")
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmcast",
        description="Daily series forecasting with a conv-LSTM tuned by swarm search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean, impute, scale and split a CSV")
    _add_common(p)
    p.add_argument("--data")
    p.add_argument("--date-column", dest="date_column")
    p.add_argument("--variables", help="comma-separated variable columns")
    p.add_argument("--region")
    p.add_argument("--split-ratio", dest="split_ratio", type=float)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tune", help="search hyperparameters for one variable")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--variable")
    p.add_argument("--algorithm", choices=sorted(OPTIMIZERS))
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--lookback", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--val-fraction", dest="val_fraction", type=float)
    p.add_argument("--fitness-epochs", dest="fitness_epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.add_argument("--repeat-steps", dest="repeat_steps", type=int)
    p.add_argument("--conv-activation", dest="conv_activation", choices=["relu", "tanh"])
    p.add_argument("--surrogate", choices=["hash"])
    p.add_argument("--extended-space", dest="extended_space", action="store_const", const=True)
    p.add_argument("--evaluation-budget", dest="evaluation_budget", type=int)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="train the final model at full epochs")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--variable")
    p.add_argument("--from-tuning", dest="from_tuning", help="tuning report.json")
    p.add_argument("--n-filters", dest="n_filters", type=int)
    p.add_argument("--kernel-size", dest="kernel_size", type=int)
    p.add_argument("--pool-size", dest="pool_size", type=int)
    p.add_argument("--lstm-units", dest="lstm_units", type=int)
    p.add_argument("--repeat-steps", dest="repeat_steps", type=int)
    p.add_argument("--conv-activation", dest="conv_activation", choices=["relu", "tanh"])
    p.add_argument("--lookback", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--optimizer", choices=["adam", "sgd"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="recursive multi-step forecast from a model")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--model")
    p.add_argument("--variable")
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="score a model on the held-out test segment")
    _add_common(p)
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--model")
    p.add_argument("--variable")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="Friedman + critical-difference comparison")
    _add_common(p)
    p.add_argument("--scores", help="CSV: test name column then one column per method")
    p.add_argument("--alpha", type=float)
    p.add_argument("--q", type=float, help="override the studentized-range constant")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench-opt", help="run an optimizer on a benchmark function")
    _add_common(p)
    p.add_argument("--function", choices=sorted(BENCHMARKS))
    p.add_argument("--algorithm", choices=sorted(OPTIMIZERS))
    p.add_argument("--dimension", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--iterations", type=int)
    p.set_defaults(func=cmd_bench_opt)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (DivergedError, DegenerateObjectiveError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except SwarmcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
