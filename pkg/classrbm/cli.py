#!/usr/bin/env python
"""
Command-line interface for classrbm.

Usage:
    classrbm train --data train.csv [--schema schema.yaml] [--classes K] [--config run.yaml] --out model.json
    classrbm predict --model model.json --data inputs.csv [--schema schema.yaml]
    classrbm relevance --model model.json [--schema schema.yaml] [--class k] [--threshold t] [--plot-data out.csv (needs --class)]
    classrbm experiment --data data.csv --grid grid.yaml --out report.json
    classrbm synth --spec synth.yaml --out data.csv
    classrbm inspect --model model.json
    classrbm fixtures --out fixtures.json

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from classrbm.config import Settings, load_config_file
from classrbm.data import load_csv, load_inputs, load_schema, synth_generate, export_csv
from classrbm.dropping import dropout_prediction_params
from classrbm.exceptions import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    EnumerationTooLargeError,
    InvalidInputError,
    InvalidLabelError,
    NumericalFailureError,
)
from classrbm.experiment import (
    best_per_scheme,
    run_experiment,
    write_plot_series,
    write_report_csv,
    write_report_json,
)
from classrbm.model import ModelParameters, predict_proba_batch
from classrbm.oracle import emit_fixtures
from classrbm.relevance import (
    DEFAULT_THRESHOLD,
    relevance_plot_series,
    relevance_report,
    write_relevance_csv,
    write_relevance_json,
    write_relevance_rows,
)
from classrbm.schemas import ExperimentGrid, SynthSpec, TrainingConfig
from classrbm.trainer import train
from classrbm.utils.classrbm_logging import ClassRBMLogger, configure_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

ERROR_CODES = {
    EXIT_USAGE: "usage_error",
    EXIT_DATA: "data_error",
    EXIT_NUMERICAL: "numerical_failure",
}


class CLIArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1."""

    def error(self, message):
        _report_failure(EXIT_USAGE, message, self.format_usage().strip())
        self.exit(EXIT_USAGE)


def _report_failure(code: int, message: str, diagnostic: Optional[str] = None) -> None:
    print(json.dumps({"error": ERROR_CODES[code], "message": message}), file=sys.stderr)
    print(diagnostic or f"classrbm: {message}", file=sys.stderr)


def _load_schema_arg(path: Optional[str]):
    return load_schema(path) if path else None


def _open_output(path: Optional[str]):
    if path:
        return open(path, "w", newline="")
    return sys.stdout


def cmd_train(args) -> int:
    config = load_config_file(args.config, TrainingConfig) if args.config else TrainingConfig()
    schema = _load_schema_arg(args.schema)
    dataset = load_csv(args.data, schema=schema, label_column=args.label_column, n_classes=args.classes)
    params, log = train(dataset, config, checkpoint_dir=args.checkpoint_dir)
    out = Path(args.out)
    params.save(out)
    log_path = log.to_csv(out.with_suffix(".log.csv"))
    print(f"model written to {out}; training log written to {log_path}")
    return EXIT_OK


def cmd_predict(args) -> int:
    params = ModelParameters.load(args.model)
    if args.dropout_trained:
        params = dropout_prediction_params(params)
    schema = _load_schema_arg(args.schema)
    X = load_inputs(args.data, schema=schema, label_column=args.label_column)
    probs = predict_proba_batch(params, X)
    labels = np.argmax(probs, axis=1) + 1
    stream = _open_output(args.out)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["row", "label"] + [f"p{k}" for k in range(1, params.K + 1)])
        for n, (label, row) in enumerate(zip(labels, probs), start=1):
            writer.writerow([n, int(label)] + [repr(float(p)) for p in row])
    finally:
        if args.out:
            stream.close()
    return EXIT_OK


def cmd_relevance(args) -> int:
    params = ModelParameters.load(args.model)
    if args.dropout_trained:
        params = dropout_prediction_params(params)
    if args.plot_data and args.class_label is None:
        raise ConfigError("--plot-data needs --class to pick the series")
    if args.class_label is not None and not 1 <= args.class_label <= params.K:
        raise ConfigError(f"--class must be in 1..{params.K}, got {args.class_label}")
    schema = _load_schema_arg(args.schema)
    names = schema.input_names() if schema is not None else None
    labels = [args.class_label] if args.class_label is not None else None
    report = relevance_report(params, names, threshold=args.threshold, labels=labels)

    if args.out:
        writer = write_relevance_json if args.format == "json" else write_relevance_csv
        writer(report, args.out)
    else:
        write_relevance_rows(report, sys.stdout)

    if args.plot_data:
        write_plot_series(relevance_plot_series(report, args.class_label), args.plot_data)
    return EXIT_OK


def cmd_experiment(args) -> int:
    grid = load_config_file(args.grid, ExperimentGrid)
    schema = _load_schema_arg(args.schema)
    dataset = load_csv(args.data, schema=schema, label_column=args.label_column, n_classes=args.classes)
    workers = args.workers or Settings.from_env().workers
    report = run_experiment(dataset, grid, workers=workers)
    out = Path(args.out)
    write_report_json(report, out)
    table = write_report_csv(report, out.with_suffix(".csv"))
    if args.plot_data:
        write_plot_series(best_per_scheme(report), args.plot_data)
    print(f"report written to {out}; table written to {table}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = load_config_file(args.spec, SynthSpec)
    dataset = synth_generate(
        spec.n_inputs, spec.n_classes, spec.n_examples, spec.signal_strength,
        np.random.default_rng(spec.seed)
    )
    out = Path(args.out)
    export_csv(dataset, out)
    record_path = out.with_suffix(".generation.json")
    record_path.write_text(json.dumps(dataset.generation.model_dump(), indent=2) + "\n")
    print(f"dataset written to {out}; generation record written to {record_path}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    params = ModelParameters.load(args.model)
    summary = {
        "dims": {"D": params.D, "M": params.M, "K": params.K},
        "blocks": {
            name: {
                "shape": list(arr.shape),
                "mean": float(arr.mean()),
                "std": float(arr.std()),
                "min": float(arr.min()),
                "max": float(arr.max()),
                "l2_norm": float(np.linalg.norm(arr)),
            }
            for name, arr in params.blocks().items()
        },
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    path = emit_fixtures(args.out, n_models=args.count, seed=args.seed)
    print(f"oracle fixtures written to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = CLIArgumentParser(prog="classrbm", description="Classification RBM with Dropping")
    subparsers = parser.add_subparsers(dest="command", parser_class=CLIArgumentParser)
    subparsers.required = True

    p = subparsers.add_parser("train", help="Train a model with contrastive divergence")
    p.add_argument("--data", required=True, help="Training CSV")
    p.add_argument("--schema", help="Categorical schema (omit for 0/1 columns)")
    p.add_argument("--config", help="Run configuration YAML (TrainingConfig)")
    p.add_argument("--out", required=True, help="Model file to write")
    p.add_argument("--label-column", help="Label column name")
    p.add_argument("--classes", type=int, help="Class count K for integer labels without a schema or sidecar")
    p.add_argument("--checkpoint-dir", help="Directory for periodic checkpoints")
    p.set_defaults(handler=cmd_train)

    p = subparsers.add_parser("predict", help="Label distribution for every row")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--label-column")
    p.add_argument("--out", help="Output CSV (default: stdout)")
    p.add_argument("--dropout-trained", action="store_true", help="Halve W2 before predicting")
    p.set_defaults(handler=cmd_predict)

    p = subparsers.add_parser("relevance", help="Relevant-input report")
    p.add_argument("--model", required=True)
    p.add_argument("--schema")
    p.add_argument("--class", dest="class_label", type=int, help="Only this 1-based class")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="Output file (default: CSV on stdout)")
    p.add_argument("--plot-data", help="Write (input, probability) series for the class given by --class")
    p.add_argument("--dropout-trained", action="store_true", help="Halve W2 first")
    p.set_defaults(handler=cmd_relevance)

    p = subparsers.add_parser("experiment", help="Run an experiment grid")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", required=True, help="ExperimentGrid YAML")
    p.add_argument("--out", required=True, help="JSON report; the table goes next to it as .csv")
    p.add_argument("--schema")
    p.add_argument("--label-column")
    p.add_argument("--classes", type=int, help="Class count K for integer labels")
    p.add_argument("--workers", type=int, help="Parallel workers (default: CLASSRBM_WORKERS)")
    p.add_argument("--plot-data", help="Write best accuracy per scheme as (index, value) rows")
    p.set_defaults(handler=cmd_experiment)

    p = subparsers.add_parser("synth", help="Generate a synthetic dataset")
    p.add_argument("--spec", required=True, help="SynthSpec YAML")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = subparsers.add_parser("inspect", help="Model dimensions and parameter statistics")
    p.add_argument("--model", required=True)
    p.set_defaults(handler=cmd_inspect)

    p = subparsers.add_parser("fixtures", help="Write brute-force oracle fixtures")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_fixtures)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = Settings.from_env()
        configure_logging(settings.log_level, settings.log_file)
        code = args.handler(args)
        ClassRBMLogger.log_command(args.command, vars(args), success=True)
        return code
    except (ConfigError, EnumerationTooLargeError) as e:
        ClassRBMLogger.log_error(f"{args.command} failed", e)
        _report_failure(EXIT_USAGE, str(e))
        return EXIT_USAGE
    except NumericalFailureError as e:
        ClassRBMLogger.log_error(f"{args.command} failed", e)
        _report_failure(EXIT_NUMERICAL, str(e))
        return EXIT_NUMERICAL
    except (DataError, DimensionMismatchError, InvalidInputError, InvalidLabelError, OSError) as e:
        ClassRBMLogger.log_error(f"{args.command} failed", e)
        _report_failure(EXIT_DATA, str(e))
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
