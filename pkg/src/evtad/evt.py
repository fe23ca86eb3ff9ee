"""Peaks-over-threshold detection rule.

The tail of the error distribution above a high initial threshold ``t`` is
modeled with a Generalized Pareto Distribution fitted by maximum likelihood
(Grimshaw's method, see :mod:`evtad._gpd`). Given a risk level ``q``, the
detection threshold is

    tau_e = t + (sigma/gamma) * ((q*n/N_t)**(-gamma) - 1)

with the analytic limit ``t + sigma*log(N_t/(q*n))`` as ``gamma -> 0``.
``n`` counts all observations in the calibration stream and ``N_t`` the
peaks above ``t``. An error is flagged when it exceeds ``tau_e``, i.e. when
its estimated tail probability falls below ``q``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._gpd import grimshaw_fit
from .errors import DataError, NumericalError
from .evaluation import group_events
from .series import ErrorSeries

# below this magnitude the shape is treated as exactly zero everywhere,
# avoiding catastrophic cancellation in the threshold/tail formulas
GAMMA_ZERO_TOL = 1e-8

DEFAULT_LEVEL = 0.98
DEFAULT_Q_GRID = (1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class GpdFit:
    """Fitted peaks-over-threshold state."""

    t: float             # initial (high-quantile) threshold
    gamma_hat: float     # GPD shape
    sigma_hat: float     # GPD scale
    n: int               # observations in the calibration stream
    n_peaks: int         # observations strictly above t
    q: float             # risk level
    tau_e: float         # final detection threshold

    def __post_init__(self):
        if self.sigma_hat <= 0:
            raise NumericalError("GPD scale must be positive")
        if not (0 < self.q < 1):
            raise DataError("risk level q must lie in (0, 1)")
        if not (1 <= self.n_peaks <= self.n):
            raise DataError("peak count must satisfy 1 <= N_t <= n")

    def to_json(self) -> str:
        payload = {
            "t": self.t,
            "gamma_hat": self.gamma_hat,
            "sigma_hat": self.sigma_hat,
            "n": self.n,
            "N_t": self.n_peaks,
            "q": self.q,
            "tau_e": self.tau_e,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GpdFit":
        d = json.loads(text)
        return cls(d["t"], d["gamma_hat"], d["sigma_hat"], d["n"], d["N_t"],
                   d["q"], d["tau_e"])

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "GpdFit":
        return cls.from_json(Path(path).read_text())


def _as_error_array(errors) -> np.ndarray:
    if isinstance(errors, ErrorSeries):
        return errors.errors
    return np.asarray(errors, dtype=np.float64)


def initial_threshold(errors, level: float = DEFAULT_LEVEL) -> float:
    """Empirical quantile (linear interpolation between order statistics)."""
    x = _as_error_array(errors)
    if not (0 < level < 1):
        raise DataError("quantile level must lie in (0, 1)")
    if x.size < 50:
        raise DataError(f"need >= 50 observations to set the initial threshold, got {x.size}")
    return float(np.quantile(x, level, method="linear"))


def fit_gpd(excesses) -> tuple[float, float]:
    """Maximum-likelihood (gamma, sigma) for positive threshold excesses.

    Falls back to the exponential limit (gamma 0, sigma = mean) when it
    attains a higher likelihood or when |gamma| < 1e-8.
    """
    y = np.ascontiguousarray(_as_error_array(excesses), dtype=np.float64)
    if y.size < 10:
        raise DataError(f"need >= 10 excesses to fit a GPD, got {y.size}")
    if not np.all(np.isfinite(y)) or np.any(y <= 0):
        raise DataError("excesses must be finite and strictly positive")
    ybar = float(y.mean())
    if float(y.max() - y.min()) <= 1e-12 * ybar:
        raise NumericalError("excesses have (near-)zero spread; GPD fit is degenerate")
    gamma, sigma_norm, ll = grimshaw_fit(y / ybar)
    if not math.isfinite(ll):
        raise NumericalError("GPD likelihood optimization failed")
    if abs(gamma) < GAMMA_ZERO_TOL:
        return 0.0, ybar
    return float(gamma), float(sigma_norm * ybar)


def evt_threshold(t: float, gamma_hat: float, sigma_hat: float, q: float,
                  n: int, n_peaks: int) -> float:
    """Detection threshold for risk level ``q``."""
    if not (0 < q < 1):
        raise DataError("risk level q must lie in (0, 1)")
    if not (1 <= n_peaks <= n):
        raise DataError("need 1 <= N_t <= n")
    if sigma_hat <= 0:
        raise DataError("sigma must be positive")
    r = q * n / n_peaks
    if abs(gamma_hat) < GAMMA_ZERO_TOL:
        return t + sigma_hat * math.log(1.0 / r)
    return t + (sigma_hat / gamma_hat) * (r ** (-gamma_hat) - 1.0)


def tail_probabilities(fit: GpdFit, x) -> tuple[np.ndarray, np.ndarray]:
    """Estimated P(error > x) for an array of values.

    Returns ``(prob, below_t)``. For values below the initial threshold the
    GPD says nothing; those entries carry the upper bound ``N_t / n`` and
    are marked in ``below_t``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    frac = fit.n_peaks / fit.n
    below = x < fit.t
    z = (x - fit.t) / fit.sigma_hat
    if abs(fit.gamma_hat) < GAMMA_ZERO_TOL:
        p = frac * np.exp(-np.where(below, 0.0, z))
    else:
        # below-t entries get a neutral argument (they are overwritten with
        # the bound); beyond a bounded tail's endpoint the probability is 0
        gz = fit.gamma_hat * z
        safe = np.where(below, 0.0, np.maximum(gz, -1.0 + 1e-16))
        p = frac * np.exp(-np.log1p(safe) / fit.gamma_hat)
        if fit.gamma_hat < 0:
            p = np.where(gz > -1.0, p, 0.0)
    p = np.where(below, frac, p)
    return p, below


def tail_probability(fit: GpdFit, x: float) -> float:
    """Scalar tail probability; values below t return the bound N_t/n."""
    p, _ = tail_probabilities(fit, float(x))
    return float(p[0])


def fit_pot(errors, q: float, level: float = DEFAULT_LEVEL) -> GpdFit:
    """Full static peaks-over-threshold calibration on one error stream."""
    x = _as_error_array(errors)
    t = initial_threshold(x, level)
    excesses = x[x > t] - t
    if excesses.size < 10:
        raise DataError(
            f"only {excesses.size} exceedances above the {level:.0%} quantile; "
            "need >= 10 to fit the tail"
        )
    gamma, sigma = fit_gpd(excesses)
    tau_e = evt_threshold(t, gamma, sigma, q, x.size, excesses.size)
    return GpdFit(t, gamma, sigma, int(x.size), int(excesses.size), q, tau_e)


def calibrate_q(init_errors: ErrorSeries, init_labels, q_grid=DEFAULT_Q_GRID,
                level: float = DEFAULT_LEVEL) -> float:
    """Pick the risk level from the calibration stream.

    Returns the smallest grid value (fewest false positives) whose threshold
    still catches every labeled anomaly in the stream; contiguous label runs
    count as one anomaly, caught when any of their indices exceeds the
    threshold. If even the largest q misses one, that largest value is
    returned with a warning.
    """
    labels = sorted(int(i) for i in init_labels)
    if not labels:
        raise DataError("no labeled anomalies in the calibration stream")
    grid = sorted(float(q) for q in q_grid)
    if not grid:
        raise DataError("empty q grid")

    by_index = dict(zip(init_errors.indices.tolist(), init_errors.errors.tolist()))
    events = group_events(labels)
    peaks = []
    for start, end in events:
        vals = [by_index[i] for i in range(start, end + 1) if i in by_index]
        if not vals:
            warnings.warn(
                f"labeled anomaly [{start}, {end}] has no error values; "
                "ignored for q calibration"
            )
            continue
        peaks.append(max(vals))
    if not peaks:
        raise DataError("no labeled anomaly overlaps the calibration errors")
    weakest = min(peaks)

    for q in grid:  # ascending: smallest q first
        fit = fit_pot(init_errors, q, level)
        if weakest > fit.tau_e:
            return q
    warnings.warn(
        f"no q in {grid} catches every labeled anomaly; falling back to {grid[-1]}"
    )
    return grid[-1]


def detect_evt(fit: GpdFit, errors: ErrorSeries) -> np.ndarray:
    """Parent indices whose error exceeds the detection threshold."""
    mask = errors.errors > fit.tau_e
    return errors.indices[mask].copy()


def with_q(fit: GpdFit, q: float) -> GpdFit:
    """Same tail fit, re-thresholded at a different risk level."""
    tau = evt_threshold(fit.t, fit.gamma_hat, fit.sigma_hat, q, fit.n, fit.n_peaks)
    return replace(fit, q=q, tau_e=tau)


def sample_gpd(rng: np.random.Generator, gamma: float, sigma: float, size: int) -> np.ndarray:
    """Inverse-CDF sampling; the oracle for the MLE recovery tests."""
    v = 1.0 - rng.random(size)  # uniform on (0, 1]
    if abs(gamma) < GAMMA_ZERO_TOL:
        return -sigma * np.log(v)
    return (sigma / gamma) * (v ** (-gamma) - 1.0)


def gpd_cdf(y, gamma: float, sigma: float) -> np.ndarray:
    """GPD distribution function on [0, inf) (zero location)."""
    y = np.asarray(y, dtype=np.float64)
    if sigma <= 0:
        raise DataError("sigma must be positive")
    if abs(gamma) < GAMMA_ZERO_TOL:
        return -np.expm1(-y / sigma)
    z = gamma * y / sigma
    if gamma < 0:
        # finite upper endpoint at -sigma/gamma
        safe = np.where(z > -1.0, z, -0.5)
        return np.where(z > -1.0, -np.expm1(np.log1p(safe) / -gamma), 1.0)
    return -np.expm1(np.log1p(z) / -gamma)
