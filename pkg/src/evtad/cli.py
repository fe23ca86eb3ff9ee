"""Command-line interface.

Subcommands mirror the pipeline stages (``split``, ``train``, ``errors``,
``detect``, ``test``, ``evaluate``, ``report``) plus ``pipeline`` to run
them all; each stage consumes the previous stage's files from the output
directory. Flags mirror the pipeline configuration; ``--config FILE``
loads a JSON document that overrides any flags. ``EVTAD_OUT_ROOT``
relocates relative output directories.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import DataError, NumericalError
from .pipeline import (DETECTOR_RULES, PipelineConfig, render_metrics_table,
                       run_pipeline, stage_detect, stage_errors,
                       stage_evaluate, stage_report, stage_split,
                       stage_stat_tests, stage_train)

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERICAL_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _add_common(p: _Parser) -> None:
    p.add_argument("--config", help="JSON config; overrides all flags")
    p.add_argument("--data", help="input CSV path")
    p.add_argument("--out", help="output directory")
    p.add_argument("--timestamp-col", default="timestamp")
    p.add_argument("--value-col", default="value")
    p.add_argument("--label-col", default="label",
                   help="label column name; 'none' disables labels")
    p.add_argument("--fractions", nargs=3, type=float, metavar=("TRAIN", "VAL", "TEST"),
                   default=[0.5, 0.25, 0.25])
    p.add_argument("--external-errors", help="(index,error) CSV replacing the model")
    p.add_argument("--layers", default="20", help="recurrent sizes, e.g. '50,20'")
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--look-back", type=int, default=1)
    p.add_argument("--look-ahead", type=int, default=1)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--horizon", type=int, default=0,
                   help="which look-ahead step feeds the detectors")
    p.add_argument("--train-stride", type=int, default=1)
    p.add_argument("--level", type=float, default=0.98,
                   help="initial-threshold quantile for the tail fit")
    p.add_argument("--q", type=float, help="fixed risk level (default: calibrate)")
    p.add_argument("--q-grid", default="1e-3,1e-4,1e-5")
    p.add_argument("--tau-g", type=float, help="fixed score threshold (default: tune)")
    p.add_argument("--fence-multiplier", type=float, default=3.0)
    p.add_argument("--tolerance", type=int, default=0)
    p.add_argument("--no-group-contiguous", action="store_true",
                   help="score every labeled index separately")
    p.add_argument("--evaluate-on", default="val+test",
                   choices=("test", "val+test", "all"))
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--shapiro-scope", default="all", choices=("all", "train"))
    p.add_argument("--ad-bootstrap", type=int, default=1999)
    p.add_argument("--seed", type=int, default=0)


def _flags_to_dict(args: argparse.Namespace) -> dict:
    label_col = None if args.label_col.lower() == "none" else args.label_col
    layers = [int(s) for s in str(args.layers).split(",") if s.strip()]
    d = {
        "data": {
            "path": args.data,
            "timestamp_col": args.timestamp_col,
            "value_col": args.value_col,
            "label_col": label_col,
        },
        "split": {"train": args.fractions[0], "validation": args.fractions[1],
                  "test": args.fractions[2]},
        "external_errors": args.external_errors,
        "detectors": {
            "gaussian": {"tau_g": args.tau_g},
            "evt": {"level": args.level, "q": args.q,
                    "q_grid": [float(s) for s in args.q_grid.split(",")]},
            "tukey": {"multiplier": args.fence_multiplier},
        },
        "match": {"tolerance": args.tolerance,
                  "group_contiguous": not args.no_group_contiguous},
        "evaluate_on": args.evaluate_on,
        "stat_tests": {"alpha": args.alpha, "shapiro_scope": args.shapiro_scope,
                       "ad_bootstrap": args.ad_bootstrap},
        "out_dir": args.out,
        "seed": args.seed,
    }
    if args.external_errors is not None:
        d["forecaster"] = None
    else:
        d["forecaster"] = {
            "recurrent_layer_sizes": layers,
            "dropout_rate": args.dropout,
            "learning_rate": args.learning_rate,
            "look_back": args.look_back,
            "look_ahead": args.look_ahead,
            "max_epochs": args.epochs,
            "batch_size": args.batch_size,
            "early_stopping_patience": args.patience,
            "seed": args.seed,
            "horizon_index": args.horizon,
            "train_stride": args.train_stride,
        }
    return d


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    d = _flags_to_dict(args)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        file_cfg = json.loads(path.read_text())
        if file_cfg.get("forecaster") is not None or file_cfg.get("external_errors"):
            # the file decides the error source outright
            d["forecaster"] = None
            d["external_errors"] = None
        d = _merge(d, file_cfg)
    if not d["data"]["path"]:
        raise DataError("no dataset given (use --data or config data.path)")
    if not d["out_dir"]:
        raise DataError("no output directory given (use --out or config out_dir)")
    root = os.environ.get("EVTAD_OUT_ROOT")
    if root and not Path(d["out_dir"]).is_absolute():
        d["out_dir"] = str(Path(root) / d["out_dir"])
    return PipelineConfig.from_dict(d)


def main(argv=None) -> int:
    parser = _Parser(prog="evtad",
                     description="Forecast-error anomaly detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("split", "write the train/validation/test split manifest"),
        ("train", "train the forecaster on the training segment"),
        ("errors", "write the prediction-error series"),
        ("detect", "fit one detection rule and flag anomalies"),
        ("test", "statistical checks of the error distribution"),
        ("evaluate", "score detections against ground-truth labels"),
        ("report", "render the metrics table and plot-ready CSV"),
        ("pipeline", "run every stage in order"),
    ]:
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        if name == "detect":
            sp.add_argument("--rule", required=True, choices=DETECTOR_RULES)
        if name == "test":
            sp.add_argument("--which", default="both", choices=("sw", "ad", "both"))

    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        if args.command == "split":
            manifest = stage_split(cfg)
            print(f"split: n={manifest['n']} train_end={manifest['train_end']} "
                  f"validation_end={manifest['validation_end']} "
                  f"rejected_rows={manifest['rejected_rows']}")
        elif args.command == "train":
            report = stage_train(cfg)
            print(f"trained: epochs={report.epochs_run} best_epoch={report.best_epoch} "
                  f"best_val_mse={min(report.validation_mse_per_epoch):.6g} "
                  f"stopped_early={report.stopped_early}")
        elif args.command == "errors":
            errors = stage_errors(cfg)
            print(f"errors: {len(errors)} values -> {cfg.out_path('errors.csv')}")
        elif args.command == "detect":
            flags = stage_detect(cfg, args.rule)
            print(f"{args.rule}: flagged {len(flags)} indices")
        elif args.command == "test":
            for rep in stage_stat_tests(cfg, args.which):
                verdict = "reject" if rep.reject_null else "retain"
                print(f"{rep.test_name}: stat={rep.statistic:.5f} "
                      f"p={rep.p_display} ({verdict} at alpha={rep.alpha})")
        elif args.command == "evaluate":
            stage_evaluate(cfg)
            payload = json.loads(cfg.out_path("metrics.json").read_text())
            print(render_metrics_table(payload), end="")
        elif args.command == "report":
            out = stage_report(cfg)
            print(f"report: {out}")
        elif args.command == "pipeline":
            payload = run_pipeline(cfg)
            print(render_metrics_table(payload), end="")
    except DataError as exc:
        print(f"evtad: data error [{args.command}]: {exc}", file=sys.stderr)
        return DATA_EXIT
    except NumericalError as exc:
        print(f"evtad: numerical failure [{args.command}]: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    return 0


if __name__ == "__main__":
    sys.exit(main())
