"""End-to-end orchestration and on-disk artifacts.

Every stage reads the previous stage's files and writes plain CSV/JSON, so
any stage can be rerun, inspected or replaced by an external tool; the
``pipeline`` command is exactly the stages composed in order. All JSON is
dumped with sorted keys and no timestamps, so identical configuration and
seed give byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import evt as evt_mod
from . import forecaster as fc
from . import gaussian as gauss_mod
from . import stattests
from . import tukey as tukey_mod
from .errors import DataError
from .evaluation import MatchSpec, compute_metrics, match_detections
from .series import (ErrorSeries, SplitSpec, load_csv, make_windows, split,
                     split_bounds, write_split_manifest)

DETECTOR_RULES = ("gaussian", "evt", "tukey")
EVAL_REGIONS = ("test", "val+test", "all")

SPLIT_FILE = "split.json"
MODEL_FILE = "model.json"
TRAIN_REPORT_FILE = "train_report.json"
ERRORS_FILE = "errors.csv"
STAT_TESTS_FILE = "stat_tests.json"
METRICS_FILE = "metrics.json"
METRICS_TABLE_FILE = "metrics.txt"
REPORT_FILE = "report.csv"


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class PipelineConfig:
    data_path: str
    out_dir: str
    timestamp_col: str = "timestamp"
    value_col: str = "value"
    label_col: str | None = "label"
    split: SplitSpec = field(default_factory=SplitSpec)
    forecaster: fc.ForecasterConfig | None = field(default_factory=fc.ForecasterConfig)
    external_errors: str | None = None
    quantile_level: float = evt_mod.DEFAULT_LEVEL
    q: float | None = None              # fixed risk level; None -> calibrate
    q_grid: tuple[float, ...] = evt_mod.DEFAULT_Q_GRID
    tau_g: float | None = None          # fixed score threshold; None -> tune
    fence_multiplier: float = tukey_mod.FAR_OUT_MULTIPLIER
    match: MatchSpec = field(default_factory=MatchSpec)
    evaluate_on: str = "val+test"
    shapiro_scope: str = "all"          # or "train"
    alpha: float = stattests.DEFAULT_ALPHA
    ad_bootstrap: int = stattests.AD_BOOTSTRAP_DEFAULT
    seed: int = 0

    def __post_init__(self):
        if (self.forecaster is None) == (self.external_errors is None):
            raise DataError(
                "exactly one error source required: a forecaster config or "
                "an external errors file"
            )
        if self.evaluate_on not in EVAL_REGIONS:
            raise DataError(f"evaluate_on must be one of {EVAL_REGIONS}")
        if self.shapiro_scope not in ("all", "train"):
            raise DataError("shapiro_scope must be 'all' or 'train'")

    @property
    def series_name(self) -> str:
        return Path(self.data_path).stem

    def out_path(self, name: str) -> Path:
        return Path(self.out_dir) / name

    def to_dict(self) -> dict:
        return {
            "data": {
                "path": self.data_path,
                "timestamp_col": self.timestamp_col,
                "value_col": self.value_col,
                "label_col": self.label_col,
            },
            "split": {
                "train": self.split.train_fraction,
                "validation": self.split.validation_fraction,
                "test": self.split.test_fraction,
            },
            "forecaster": None if self.forecaster is None else self.forecaster.to_dict(),
            "external_errors": self.external_errors,
            "detectors": {
                "gaussian": {"tau_g": self.tau_g},
                "evt": {"level": self.quantile_level, "q": self.q,
                        "q_grid": list(self.q_grid)},
                "tukey": {"multiplier": self.fence_multiplier},
            },
            "match": {"tolerance": self.match.tolerance,
                      "group_contiguous": self.match.group_contiguous},
            "evaluate_on": self.evaluate_on,
            "stat_tests": {"alpha": self.alpha, "shapiro_scope": self.shapiro_scope,
                           "ad_bootstrap": self.ad_bootstrap},
            "out_dir": self.out_dir,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        data = d.get("data", {})
        if "path" not in data:
            raise DataError("config: data.path is required")
        sp = d.get("split", {})
        spec = SplitSpec(sp.get("train", 0.5), sp.get("validation", 0.25),
                         sp.get("test", 0.25))
        fc_cfg = d.get("forecaster")
        forecaster = None if fc_cfg is None else fc.ForecasterConfig.from_dict(fc_cfg)
        det = d.get("detectors", {})
        g = det.get("gaussian", {})
        e = det.get("evt", {})
        t = det.get("tukey", {})
        m = d.get("match", {})
        st_ = d.get("stat_tests", {})
        if "out_dir" not in d:
            raise DataError("config: out_dir is required")
        return cls(
            data_path=data["path"],
            out_dir=d["out_dir"],
            timestamp_col=data.get("timestamp_col", "timestamp"),
            value_col=data.get("value_col", "value"),
            label_col=data.get("label_col", "label"),
            split=spec,
            forecaster=forecaster,
            external_errors=d.get("external_errors"),
            quantile_level=e.get("level", evt_mod.DEFAULT_LEVEL),
            q=e.get("q"),
            q_grid=tuple(e.get("q_grid", evt_mod.DEFAULT_Q_GRID)),
            tau_g=g.get("tau_g"),
            fence_multiplier=t.get("multiplier", tukey_mod.FAR_OUT_MULTIPLIER),
            match=MatchSpec(m.get("tolerance", 0), m.get("group_contiguous", True)),
            evaluate_on=d.get("evaluate_on", "val+test"),
            shapiro_scope=st_.get("shapiro_scope", "all"),
            alpha=st_.get("alpha", stattests.DEFAULT_ALPHA),
            ad_bootstrap=st_.get("ad_bootstrap", stattests.AD_BOOTSTRAP_DEFAULT),
            seed=d.get("seed", 0),
        )

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        return cls.from_dict(json.loads(path.read_text()))


# ---------------------------------------------------------------------------
# stage helpers

def _load_series(cfg: PipelineConfig):
    series, rejected = load_csv(cfg.data_path, cfg.timestamp_col, cfg.value_col,
                                cfg.label_col)
    return series, rejected


def _read_errors(cfg: PipelineConfig) -> ErrorSeries:
    return fc.load_external_errors(cfg.out_path(ERRORS_FILE))


def _regions(manifest: dict) -> tuple[int, int, int]:
    return manifest["train_end"], manifest["validation_end"], manifest["n"]


def _eval_bounds(cfg: PipelineConfig, manifest: dict) -> tuple[int, int]:
    i, j, n = _regions(manifest)
    if cfg.evaluate_on == "test":
        return j, n
    if cfg.evaluate_on == "val+test":
        return i, n
    return 0, n


def _write_detections(path: Path, errors: ErrorSeries, scores, flagged,
                      extra_name: str | None = None, extra=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["index", "score", "flagged"]
        if extra_name:
            header.append(extra_name)
        w.writerow(header)
        for k in range(len(errors)):
            row = [int(errors.indices[k]), repr(float(scores[k])), int(flagged[k])]
            if extra_name:
                row.append(int(extra[k]))
            w.writerow(row)


def _read_detections(path: Path) -> np.ndarray:
    if not path.exists():
        raise DataError(f"detections not found: {path} (run `detect` first)")
    flagged = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            if row["flagged"] == "1":
                flagged.append(int(row["index"]))
    return np.array(sorted(flagged), dtype=np.int64)


def detections_file(rule: str) -> str:
    return f"detections_{rule}.csv"


def fit_file(rule: str) -> str:
    return f"{rule}_fit.json"


# ---------------------------------------------------------------------------
# stages

def stage_split(cfg: PipelineConfig) -> dict:
    series, rejected = _load_series(cfg)
    split(series, cfg.split)  # validates the anomaly-free training segment
    cfg.out_path("").mkdir(parents=True, exist_ok=True)
    manifest = write_split_manifest(cfg.out_path(SPLIT_FILE), series, cfg.split)
    manifest["rejected_rows"] = rejected
    return manifest


def stage_train(cfg: PipelineConfig) -> fc.TrainReport:
    if cfg.forecaster is None:
        raise DataError("no forecaster configured (external errors supplied instead)")
    series, _ = _load_series(cfg)
    train_seg, val_seg, _ = split(series, cfg.split)
    fcfg = cfg.forecaster
    train_windows = make_windows(train_seg, fcfg.look_back, fcfg.look_ahead)
    val_windows = make_windows(val_seg, fcfg.look_back, fcfg.look_ahead)
    params, report = fc.train(fcfg, train_windows, val_windows)
    cfg.out_path("").mkdir(parents=True, exist_ok=True)
    fc.save_checkpoint(cfg.out_path(MODEL_FILE), params, fcfg)
    _dump_json(cfg.out_path(TRAIN_REPORT_FILE), report.to_dict())
    return report


def stage_errors(cfg: PipelineConfig) -> ErrorSeries:
    if cfg.external_errors is not None:
        errors = fc.load_external_errors(cfg.external_errors)
    else:
        series, _ = _load_series(cfg)
        params, fcfg = fc.load_checkpoint(cfg.out_path(MODEL_FILE))
        errors = fc.predict_errors(params, series, fcfg)
    cfg.out_path("").mkdir(parents=True, exist_ok=True)
    with open(cfg.out_path(ERRORS_FILE), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "error"])
        for idx, err in zip(errors.indices, errors.errors):
            w.writerow([int(idx), repr(float(err))])
    return errors


def stage_detect(cfg: PipelineConfig, rule: str) -> np.ndarray:
    if rule not in DETECTOR_RULES:
        raise DataError(f"unknown detection rule {rule!r}")
    manifest = _read_manifest(cfg)
    errors = _read_errors(cfg)
    i, j, _ = _regions(manifest)
    labels = manifest["labels"]

    if rule == "gaussian":
        train_errors = errors.restrict(0, i)
        fit = gauss_mod.fit_gaussian(train_errors)
        if cfg.tau_g is not None:
            fit = gauss_mod.GaussianFit(fit.mu, fit.sigma2, cfg.tau_g)
        else:
            val_errors = errors.restrict(i, j)
            val_labels = [k for k in labels if i <= k < j]
            fit = gauss_mod.tune_tau_g(fit, val_errors, val_labels, cfg.match)
        fit.save(cfg.out_path(fit_file(rule)))
        scores = gauss_mod.log_pd(fit, errors.errors)
        flagged = scores < fit.tau_g
        _write_detections(cfg.out_path(detections_file(rule)), errors, scores, flagged)

    elif rule == "evt":
        init_errors = errors.restrict(0, j)
        q = cfg.q
        if q is None:
            init_labels = [k for k in labels if k < j]
            if not init_labels:
                raise DataError(
                    "cannot calibrate q: no labeled anomaly in the "
                    "train+validation stream; set a fixed q"
                )
            q = evt_mod.calibrate_q(init_errors, init_labels, cfg.q_grid,
                                    cfg.quantile_level)
        fit = evt_mod.fit_pot(init_errors, q, cfg.quantile_level)
        fit.save(cfg.out_path(fit_file(rule)))
        scores, below = evt_mod.tail_probabilities(fit, errors.errors)
        flagged = errors.errors > fit.tau_e
        _write_detections(cfg.out_path(detections_file(rule)), errors, scores,
                          flagged, "below_t", below)

    else:  # tukey
        fit = tukey_mod.fit_tukey(errors, cfg.fence_multiplier)
        fit.save(cfg.out_path(fit_file(rule)))
        flagged = errors.errors > fit.tau_t
        _write_detections(cfg.out_path(detections_file(rule)), errors,
                          errors.errors, flagged)

    return errors.indices[np.asarray(flagged)]


def _read_manifest(cfg: PipelineConfig) -> dict:
    from .series import read_split_manifest
    return read_split_manifest(cfg.out_path(SPLIT_FILE))


def stage_stat_tests(cfg: PipelineConfig, which: str = "both") -> list[stattests.TestReport]:
    if which not in ("sw", "ad", "both"):
        raise DataError("which must be 'sw', 'ad' or 'both'")
    manifest = _read_manifest(cfg)
    errors = _read_errors(cfg)
    i, j, _ = _regions(manifest)
    reports = []

    if which in ("sw", "both"):
        stream = errors.errors if cfg.shapiro_scope == "all" else errors.restrict(0, i).errors
        n = len(stream)
        method_suffix = ""
        if n > stattests.SW_MAX_N:
            # deterministic even-stride subsample into the supported range
            idx = np.linspace(0, n - 1, stattests.SW_MAX_N).round().astype(int)
            stream = stream[np.unique(idx)]
            method_suffix = "-subsampled"
        rep = stattests.shapiro_wilk(stream, cfg.alpha)
        if method_suffix:
            rep = stattests.TestReport(rep.test_name, rep.statistic, rep.p_value,
                                       rep.alpha, rep.reject_null,
                                       rep.method + method_suffix, rep.n,
                                       rep.p_display)
        reports.append(rep)

    if which in ("ad", "both"):
        init = errors.restrict(0, j).errors
        t = evt_mod.initial_threshold(init, cfg.quantile_level)
        excesses = init[init > t] - t
        gamma, sigma = evt_mod.fit_gpd(excesses)
        reports.append(stattests.anderson_darling_gpd(
            excesses, gamma, sigma, cfg.alpha, "auto", cfg.ad_bootstrap, cfg.seed))

    path = cfg.out_path(STAT_TESTS_FILE)
    existing: dict[str, dict] = {}
    if path.exists():
        for entry in json.loads(path.read_text()):
            existing[entry["test"]] = entry
    for rep in reports:
        existing[rep.test_name] = rep.to_dict()
    _dump_json(path, [existing[k] for k in sorted(existing)])
    return reports


def stage_evaluate(cfg: PipelineConfig) -> list[dict]:
    manifest = _read_manifest(cfg)
    lo, hi = _eval_bounds(cfg, manifest)
    labels = [k for k in manifest["labels"] if lo <= k < hi]
    results = []
    for rule in DETECTOR_RULES:
        path = cfg.out_path(detections_file(rule))
        if not path.exists():
            continue
        flags = _read_detections(path)
        flags = flags[(flags >= lo) & (flags < hi)]
        counts = match_detections(flags, labels, cfg.match)
        metrics = compute_metrics(counts, rule, cfg.series_name)
        entry = metrics.to_dict()
        fit_path = cfg.out_path(fit_file(rule))
        if fit_path.exists():
            entry["fit"] = json.loads(fit_path.read_text())
        results.append(entry)
    if not results:
        raise DataError("no detection files found; run `detect` first")
    payload = {"series": cfg.series_name, "evaluate_on": cfg.evaluate_on,
               "match_tolerance": cfg.match.tolerance, "detectors": results}
    _dump_json(cfg.out_path(METRICS_FILE), payload)
    return results


def render_metrics_table(payload: dict) -> str:
    """Plain-text metrics table, one row per detection rule."""
    lines = [
        f"series: {payload['series']}    evaluated on: {payload['evaluate_on']}",
        f"{'detector':<10} {'P':>6} {'R':>6} {'F1':>6} {'TP':>4} {'FP':>4} {'FN':>4}  regulator",
    ]
    for d in payload["detectors"]:
        fit = d.get("fit", {})
        if d["detector"] == "gaussian":
            reg = f"tau_g={fit.get('tau_g'):.4g}" if fit.get("tau_g") is not None else "tau_g=?"
        elif d["detector"] == "evt":
            reg = f"q={fit.get('q'):.4g}" if fit.get("q") is not None else "q=?"
        else:
            reg = f"fence={fit.get('tau_t'):.4g}" if fit.get("tau_t") is not None else "fence=?"
        lines.append(
            f"{d['detector']:<10} {d['precision']:>6.2f} {d['recall']:>6.2f} "
            f"{d['f1']:>6.2f} {d['true_positives']:>4d} {d['false_positives']:>4d} "
            f"{d['false_negatives']:>4d}  {reg}"
        )
    return "\n".join(lines) + "\n"


def stage_report(cfg: PipelineConfig) -> Path:
    """Plot-ready CSV (actual, predicted, error, thresholds, flags) plus the
    rendered metrics table."""
    manifest = _read_manifest(cfg)
    metrics_path = cfg.out_path(METRICS_FILE)
    if not metrics_path.exists():
        raise DataError("metrics not found; run `evaluate` first")
    payload = json.loads(metrics_path.read_text())
    cfg.out_path(METRICS_TABLE_FILE).write_text(render_metrics_table(payload))

    series, _ = _load_series(cfg)
    errors = _read_errors(cfg)

    predictions = {}
    if cfg.external_errors is None and cfg.out_path(MODEL_FILE).exists():
        params, fcfg = fc.load_checkpoint(cfg.out_path(MODEL_FILE))
        windows = make_windows(series, fcfg.look_back, fcfg.look_ahead)
        x = params.scale(windows.inputs)
        preds = fc.forward_batch(params, x)
        vals = params.unscale(preds[:, fcfg.horizon_index])
        for idx, v in zip(windows.origin_indices + fcfg.horizon_index, vals):
            predictions[int(idx)] = float(v)

    fits = {}
    for rule in DETECTOR_RULES:
        p = cfg.out_path(fit_file(rule))
        if p.exists():
            fits[rule] = json.loads(p.read_text())
    flags = {rule: set(_read_detections(cfg.out_path(detections_file(rule))).tolist())
             for rule in DETECTOR_RULES if cfg.out_path(detections_file(rule)).exists()}

    gauss_fit = fits.get("gaussian")
    out = cfg.out_path(REPORT_FILE)
    err_by_index = dict(zip(errors.indices.tolist(), errors.errors.tolist()))
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "timestamp", "actual", "predicted", "error",
                    "log_pd", "tau_g", "evt_threshold", "tukey_fence",
                    "flag_gaussian", "flag_evt", "flag_tukey", "label"])
        for k in errors.indices.tolist():
            err = err_by_index[k]
            log_pd = ""
            if gauss_fit is not None:
                g = gauss_mod.GaussianFit(gauss_fit["mu"], gauss_fit["sigma2"],
                                          gauss_fit.get("tau_g"))
                log_pd = repr(float(gauss_mod.log_pd(g, err)))
            w.writerow([
                k, int(series.timestamps[k]), repr(float(series.values[k])),
                repr(predictions[k]) if k in predictions else "",
                repr(float(err)),
                log_pd,
                repr(float(gauss_fit["tau_g"])) if gauss_fit and gauss_fit.get("tau_g") is not None else "",
                repr(float(fits["evt"]["tau_e"])) if "evt" in fits else "",
                repr(float(fits["tukey"]["tau_t"])) if "tukey" in fits else "",
                int(k in flags.get("gaussian", ())),
                int(k in flags.get("evt", ())),
                int(k in flags.get("tukey", ())),
                int(k in set(manifest["labels"])),
            ])
    return out


def run_pipeline(cfg: PipelineConfig) -> dict:
    """All stages in order; returns the evaluation payload."""
    # fail before writing anything if the dataset is unusable
    _load_series(cfg)
    stage_split(cfg)
    if cfg.forecaster is not None:
        stage_train(cfg)
    stage_errors(cfg)
    for rule in DETECTOR_RULES:
        stage_detect(cfg, rule)
    stage_stat_tests(cfg, "both")
    stage_evaluate(cfg)
    stage_report(cfg)
    return json.loads(cfg.out_path(METRICS_FILE).read_text())
