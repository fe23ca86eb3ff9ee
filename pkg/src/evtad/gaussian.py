"""Gaussian detection rule.

Training errors are assumed normal; their MLE mean/variance turn each error
into a log probability density, used as an anomaly score (low = suspicious).
The score threshold is tuned on a labeled validation stream to maximize F1,
preferring fewer false positives on ties.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataError, NumericalError
from .evaluation import MatchSpec, compute_metrics, match_detections
from .series import ErrorSeries


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    sigma2: float
    tau_g: float | None = None  # log-density threshold, set by tuning

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise NumericalError("variance must be positive")

    def to_json(self) -> str:
        return json.dumps(
            {"mu": self.mu, "sigma2": self.sigma2, "tau_g": self.tau_g},
            indent=2, sort_keys=True,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GaussianFit":
        d = json.loads(text)
        return cls(d["mu"], d["sigma2"], d.get("tau_g"))

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "GaussianFit":
        return cls.from_json(Path(path).read_text())


def fit_gaussian(errors) -> GaussianFit:
    """MLE fit: sample mean and biased (1/n) variance."""
    x = errors.errors if isinstance(errors, ErrorSeries) else np.asarray(errors, dtype=np.float64)
    if x.size < 2:
        raise DataError("need >= 2 observations to fit")
    mu = float(x.mean())
    sigma2 = float(np.mean((x - mu) ** 2))
    if sigma2 <= 0.0:
        raise NumericalError("zero variance: all errors identical, Gaussian fit is degenerate")
    return GaussianFit(mu, sigma2)


def log_pd(fit: GaussianFit, x) -> np.ndarray | float:
    """Log probability density under the fitted normal; lower = more anomalous."""
    arr = np.asarray(x, dtype=np.float64)
    out = -0.5 * math.log(2.0 * math.pi * fit.sigma2) - (arr - fit.mu) ** 2 / (2.0 * fit.sigma2)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def tune_tau_g(fit: GaussianFit, val_errors: ErrorSeries, val_labels,
               matcher: MatchSpec = MatchSpec()) -> GaussianFit:
    """Grid-search the score threshold that maximizes validation F1.

    Candidates are midpoints between consecutive sorted validation scores
    plus sentinels outside the score range; any achievable flag set is
    realized by one of these. Ties prefer fewer false positives, then the
    lower threshold.
    """
    if not val_labels:
        raise DataError("threshold tuning needs >= 1 labeled validation anomaly")
    scores = np.asarray(log_pd(fit, val_errors.errors), dtype=np.float64)
    uniq = np.unique(scores)
    candidates = [uniq[0] - 1.0]
    candidates.extend(0.5 * (uniq[:-1] + uniq[1:]))
    candidates.append(uniq[-1] + 1.0)

    best = None  # (f1, -fp, -tau) maximized
    best_tau = None
    for tau in candidates:
        flags = val_errors.indices[scores < tau]
        counts = match_detections(flags, val_labels, matcher)
        m = compute_metrics(counts)
        key = (m.f1, -counts.false_positives, -tau)
        if best is None or key > best:
            best = key
            best_tau = float(tau)
    return replace(fit, tau_g=best_tau)


def detect_gaussian(fit: GaussianFit, errors: ErrorSeries) -> np.ndarray:
    """Parent indices whose log-density score falls below the threshold."""
    if fit.tau_g is None:
        raise DataError("threshold not set; run tune_tau_g first")
    scores = log_pd(fit, errors.errors)
    return errors.indices[scores < fit.tau_g].copy()
