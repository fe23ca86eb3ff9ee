"""Distributional assumption checks for the error stream.

Two tests back the choice of detection rule: Shapiro-Wilk normality on the
prediction errors (Royston's AS R94 approximation, valid for 3 <= n <= 5000)
and an Anderson-Darling goodness-of-fit of the threshold excesses against
the fitted GPD. The AD null distribution accounts for estimated parameters:
p-values come from a Monte-Carlo-calibrated critical-value table indexed by
the fitted shape (cf. Choulakian & Stephens 2001), or from a parametric
bootstrap when the shape falls outside the tabulated range.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from ._ad_table import AD_GAMMAS, AD_LEVELS, AD_CRITICAL
from .errors import DataError, NumericalError
from .evt import fit_gpd, gpd_cdf, sample_gpd

P_CLAMP = 1e-300  # smaller p-values are clamped and marked in the report
DEFAULT_ALPHA = 1e-3
SW_MAX_N = 5000
AD_BOOTSTRAP_DEFAULT = 1999


@dataclass(frozen=True)
class TestReport:
    test_name: str
    statistic: float
    p_value: float
    alpha: float
    reject_null: bool
    method: str          # how the p-value was obtained
    n: int               # sample size actually tested
    p_display: str       # exact p, or "< 1e-300" when clamped

    def to_dict(self) -> dict:
        return {
            "test": self.test_name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "p_display": self.p_display,
            "alpha": self.alpha,
            "reject_null": self.reject_null,
            "method": self.method,
            "n": self.n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _make_report(name: str, stat: float, p: float, alpha: float, method: str,
                 n: int) -> TestReport:
    if p < P_CLAMP:
        p_display = f"< {P_CLAMP:g}"
        p = P_CLAMP
    else:
        p_display = repr(float(p))
    return TestReport(name, float(stat), float(p), alpha, bool(p < alpha),
                      method, int(n), p_display)


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1992 approximation, AS R94)

_SW_C1 = (-2.706056, 4.434685, -2.07119, -0.147981, 0.221157, 0.0)
_SW_C2 = (-3.582633, 5.682633, -1.752461, -0.293762, 0.042981, 0.0)
_SW_C3 = (-0.0006714, 0.025054, -0.39978, 0.544)
_SW_C4 = (-0.0020322, 0.062767, -0.77857, 1.3822)
_SW_C5 = (0.0038915, -0.083751, -0.31082, -1.5861)
_SW_C6 = (0.0030302, -0.082676, -0.4803)
_SW_G = (0.459, -2.273)


@lru_cache(maxsize=64)
def _sw_weights(n: int) -> np.ndarray:
    """Royston's approximation to the normalized normal-scores weights."""
    if n == 3:
        s = math.sqrt(0.5)
        return np.array([-s, 0.0, s])
    m = norm.ppf((np.arange(1, n + 1) - 0.375) / (n + 0.25))
    msq = float(m @ m)
    u = 1.0 / math.sqrt(n)
    a = np.empty(n)
    a_n = m[-1] / math.sqrt(msq) + np.polyval(_SW_C1, u)
    if n > 5:
        a_n1 = m[-2] / math.sqrt(msq) + np.polyval(_SW_C2, u)
        phi = (msq - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (1.0 - 2.0 * a_n ** 2 - 2.0 * a_n1 ** 2)
        a[2:-2] = m[2:-2] / math.sqrt(phi)
        a[-2], a[1] = a_n1, -a_n1
    else:
        phi = (msq - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n ** 2)
        a[1:-1] = m[1:-1] / math.sqrt(phi)
    a[-1], a[0] = a_n, -a_n
    return a


def shapiro_wilk(sample, alpha: float = DEFAULT_ALPHA) -> TestReport:
    """W statistic and p-value for the hypothesis of normality.

    W is the squared correlation between the ordered sample and approximate
    normal scores; the p-value comes from Royston's normalizing
    transformation of ln(1 - W).
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.size
    if not 3 <= n <= SW_MAX_N:
        raise DataError(f"Shapiro-Wilk supports 3 <= n <= {SW_MAX_N}, got {n}")
    if not np.all(np.isfinite(x)):
        raise DataError("sample must be finite")
    ssd = float(np.sum((x - x.mean()) ** 2))
    if ssd <= 0.0 or x[-1] - x[0] < 1e-300:
        raise NumericalError("zero-variance sample; W is undefined")

    a = _sw_weights(n)
    w = float((a @ x) ** 2 / ssd)
    w = min(w, 1.0)

    if n == 3:
        p = 1.909859 * (math.asin(math.sqrt(w)) - 1.047198)
        p = min(max(p, 0.0), 1.0)
        return _make_report("shapiro-wilk", w, p, alpha, "exact-n3", n)

    w1 = 1.0 - w
    if n <= 11:
        if w1 <= 0.0:
            return _make_report("shapiro-wilk", w, 1.0, alpha, "royston-small-n", n)
        gamma = np.polyval(_SW_G, n)
        if math.log(w1) >= gamma:
            return _make_report("shapiro-wilk", w, 0.0, alpha, "royston-small-n", n)
        y = -math.log(gamma - math.log(w1))
        mu = np.polyval(_SW_C3, n)
        sd = math.exp(np.polyval(_SW_C4, n))
        method = "royston-small-n"
    else:
        if w1 <= 0.0:
            return _make_report("shapiro-wilk", w, 1.0, alpha, "royston-large-n", n)
        y = math.log(w1)
        ln_n = math.log(n)
        mu = np.polyval(_SW_C5, ln_n)
        sd = math.exp(np.polyval(_SW_C6, ln_n))
        method = "royston-large-n"
    p = float(norm.sf((y - mu) / sd))
    return _make_report("shapiro-wilk", w, p, alpha, method, n)


# ---------------------------------------------------------------------------
# Anderson-Darling against a fitted GPD

def anderson_darling_statistic(excesses, gamma_hat: float, sigma_hat: float) -> float:
    """A-squared distance between the sample and the fitted GPD."""
    y = np.sort(np.asarray(excesses, dtype=np.float64))
    n = y.size
    if n < 10:
        raise DataError(f"need >= 10 excesses, got {n}")
    if np.any(y <= 0):
        raise DataError("excesses must be strictly positive")
    if gamma_hat < 0 and y[-1] >= -sigma_hat / gamma_hat:
        raise DataError("excess outside the fitted GPD support")
    z = gpd_cdf(y, gamma_hat, sigma_hat)
    z = np.clip(z, 1e-300, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    return float(-n - np.mean((2 * i - 1) * (np.log(z) + np.log1p(-z[::-1]))))


def _table_p_value(a2: float, gamma_hat: float) -> tuple[float, str]:
    """Interpolate the null p-value from the critical-value table.

    Linear in gamma across rows, then log-linear in p against A-squared;
    beyond the most extreme tabulated level the last segment is
    extrapolated, and p-values above the top level are clamped.
    """
    g = float(np.clip(gamma_hat, AD_GAMMAS[0], AD_GAMMAS[-1]))
    cv = np.array([np.interp(g, AD_GAMMAS, AD_CRITICAL[:, j])
                   for j in range(len(AD_LEVELS))])
    # AD_LEVELS descend (0.99 ... 0.001) as critical values ascend
    log_p = np.log(AD_LEVELS)
    if a2 <= cv[0]:
        return float(AD_LEVELS[0]), "table-clamped"
    if a2 >= cv[-1]:
        slope = (log_p[-1] - log_p[-2]) / (cv[-1] - cv[-2])
        return float(math.exp(log_p[-1] + slope * (a2 - cv[-1]))), "table-extrapolated"
    j = int(np.searchsorted(cv, a2)) - 1
    frac = (a2 - cv[j]) / (cv[j + 1] - cv[j])
    return float(math.exp(log_p[j] + frac * (log_p[j + 1] - log_p[j]))), "table"


def anderson_darling_gpd(excesses, gamma_hat: float, sigma_hat: float,
                         alpha: float = DEFAULT_ALPHA, method: str = "auto",
                         n_bootstrap: int = AD_BOOTSTRAP_DEFAULT,
                         seed: int = 0) -> TestReport:
    """Goodness-of-fit of threshold excesses to a fitted GPD.

    ``method`` is "auto" (table when the shape is tabulated, bootstrap
    otherwise), "table" or "bootstrap". The parametric bootstrap refits
    every resample, reproducing the estimated-parameter null.
    """
    y = np.asarray(excesses, dtype=np.float64)
    a2 = anderson_darling_statistic(y, gamma_hat, sigma_hat)
    n = y.size

    if method not in ("auto", "table", "bootstrap"):
        raise DataError(f"unknown method {method!r}")
    use_table = AD_GAMMAS[0] <= gamma_hat <= AD_GAMMAS[-1]
    if method == "auto":
        method = "table" if use_table else "bootstrap"
    if method == "table":
        if not use_table:
            raise DataError(
                f"shape {gamma_hat:.3g} outside tabulated range "
                f"[{AD_GAMMAS[0]}, {AD_GAMMAS[-1]}]; use the bootstrap"
            )
        p, how = _table_p_value(a2, gamma_hat)
        return _make_report("anderson-darling-gpd", a2, p, alpha, how, n)

    if n_bootstrap < 999:
        raise DataError("parametric bootstrap needs >= 999 resamples")
    streams = np.random.SeedSequence(seed).spawn(n_bootstrap)
    exceed = 0
    for child in streams:
        rng = np.random.default_rng(child)
        sim = sample_gpd(rng, gamma_hat, sigma_hat, n)
        g_b, s_b = fit_gpd(sim)
        if anderson_darling_statistic(sim, g_b, s_b) >= a2:
            exceed += 1
    p = (1.0 + exceed) / (n_bootstrap + 1.0)
    return _make_report("anderson-darling-gpd", a2, p, alpha,
                        f"bootstrap-{n_bootstrap}", n)
