"""Tukey fence detection rule.

Distribution-free: the fence sits a fixed multiple of the interquartile
range above the upper quartile of the whole error stream (train, validation
and test concatenated). Errors are non-negative deviations, so only the
upper fence applies. The default multiplier 3 is the "far out" fence; 1.5
gives the conventional inner fence and is exposed for exploration only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .series import ErrorSeries

FAR_OUT_MULTIPLIER = 3.0


@dataclass(frozen=True)
class TukeyFit:
    q1: float
    q3: float
    tau_t: float
    multiplier: float = FAR_OUT_MULTIPLIER

    def __post_init__(self):
        if self.q3 < self.q1:
            raise DataError("upper quartile below lower quartile")

    def to_json(self) -> str:
        return json.dumps(
            {"q1": self.q1, "q3": self.q3, "tau_t": self.tau_t,
             "multiplier": self.multiplier},
            indent=2, sort_keys=True,
        ) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TukeyFit":
        d = json.loads(text)
        return cls(d["q1"], d["q3"], d["tau_t"], d.get("multiplier", FAR_OUT_MULTIPLIER))

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "TukeyFit":
        return cls.from_json(Path(path).read_text())


def fit_tukey(errors, multiplier: float = FAR_OUT_MULTIPLIER) -> TukeyFit:
    """Quartiles by linear interpolation; fence = Q3 + multiplier * IQR."""
    x = errors.errors if isinstance(errors, ErrorSeries) else np.asarray(errors, dtype=np.float64)
    if x.size < 4:
        raise DataError(f"need >= 4 observations for quartiles, got {x.size}")
    if multiplier <= 0:
        raise DataError("fence multiplier must be positive")
    q1 = float(np.quantile(x, 0.25, method="linear"))
    q3 = float(np.quantile(x, 0.75, method="linear"))
    return TukeyFit(q1, q3, q3 + multiplier * (q3 - q1), multiplier)


def detect_tukey(fit: TukeyFit, errors: ErrorSeries) -> np.ndarray:
    """Parent indices whose error strictly exceeds the fence."""
    return errors.indices[errors.errors > fit.tau_t].copy()
