"""Time-series ingestion, splitting, windowing and error construction.

Everything downstream of ingestion works on integer tick indices: CSV
timestamps (ISO-8601 or plain integers) are normalized at load time because
the detection rules only need ordering, never wall-clock arithmetic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A univariate series with optional ground-truth anomaly labels.

    Parameters
    ----------
    timestamps : np.ndarray of int64
        Strictly increasing integer ticks.
    values : np.ndarray of float64
        Finite observations, one per tick.
    labels : frozenset of int
        Indices (into ``values``) marked anomalous. Empty when unlabeled.
    """

    timestamps: np.ndarray
    values: np.ndarray
    labels: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", frozenset(int(i) for i in self.labels))
        if ts.shape != vals.shape or ts.ndim != 1:
            raise DataError("timestamps and values must be 1-D and equally long")
        if len(ts) > 1 and not np.all(np.diff(ts) > 0):
            raise DataError("timestamps must strictly increase")
        if not np.all(np.isfinite(vals)):
            raise DataError("values must be finite")
        n = len(vals)
        if any(i < 0 or i >= n for i in self.labels):
            raise DataError("label index out of range")

    def __len__(self):
        return len(self.values)

    def segment(self, start: int, stop: int) -> "TimeSeries":
        """Contiguous sub-series with labels re-based to local indices."""
        labels = frozenset(i - start for i in self.labels if start <= i < stop)
        return TimeSeries(self.timestamps[start:stop], self.values[start:stop], labels)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological train/validation/test fractions; must sum to one."""

    train_fraction: float = 0.5
    validation_fraction: float = 0.25
    test_fraction: float = 0.25

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(f < 0 or f > 1 for f in fracs):
            raise DataError("split fractions must lie in [0, 1]")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass(frozen=True, eq=False)
class WindowSet:
    """Sliding (input, target) pairs cut from a parent series.

    ``origin_indices[i]`` is the parent index of ``targets[i][0]``; the
    matching input window ends at ``origin_indices[i] - 1``.
    """

    inputs: np.ndarray      # (m, l_b)
    targets: np.ndarray     # (m, l_a)
    origin_indices: np.ndarray  # (m,)

    def __post_init__(self):
        if not (len(self.inputs) == len(self.targets) == len(self.origin_indices)):
            raise DataError("window arrays must be equally long")

    def __len__(self):
        return len(self.inputs)

    @property
    def look_back(self) -> int:
        return self.inputs.shape[1]

    @property
    def look_ahead(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    """Non-negative prediction errors aligned to parent-series indices."""

    indices: np.ndarray  # (m,) int64, strictly increasing
    errors: np.ndarray   # (m,) float64, >= 0

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        err = np.asarray(self.errors, dtype=np.float64)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "errors", err)
        if idx.shape != err.shape or idx.ndim != 1:
            raise DataError("indices and errors must be 1-D and equally long")
        if len(idx) > 1 and not np.all(np.diff(idx) > 0):
            raise DataError("error indices must strictly increase")
        if not np.all(np.isfinite(err)) or np.any(err < 0):
            raise DataError("errors must be finite and non-negative")

    def __len__(self):
        return len(self.errors)

    def restrict(self, start: int, stop: int) -> "ErrorSeries":
        """Errors whose parent index falls in ``[start, stop)``."""
        mask = (self.indices >= start) & (self.indices < stop)
        return ErrorSeries(self.indices[mask], self.errors[mask])


def _parse_timestamp(raw: str) -> int:
    raw = raw.strip()
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return int(datetime.fromisoformat(raw).timestamp())
    except ValueError:
        raise DataError(f"unparseable timestamp {raw!r}") from None


def load_csv(path, timestamp_col: str = "timestamp", value_col: str = "value",
             label_col: str | None = "label") -> tuple[TimeSeries, int]:
    """Load a headered CSV into a :class:`TimeSeries`.

    Rows whose value is non-finite, or whose timestamp does not strictly
    increase past the previous accepted row, are dropped; the count of
    dropped rows is returned alongside the series. A missing file, an
    unparseable field or an empty result raise :class:`DataError`.

    Returns
    -------
    (TimeSeries, int)
        The loaded series and the number of rejected rows.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset not found: {path}")

    timestamps: list[int] = []
    values: list[float] = []
    labels: set[int] = set()
    rejected = 0

    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        for col in (timestamp_col, value_col):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r}")
        has_labels = label_col is not None and label_col in reader.fieldnames

        for row in reader:
            ts = _parse_timestamp(row[timestamp_col])
            try:
                val = float(row[value_col])
            except ValueError:
                raise DataError(f"{path}: unparseable value {row[value_col]!r}") from None
            if not math.isfinite(val):
                rejected += 1
                continue
            if timestamps and ts <= timestamps[-1]:
                rejected += 1
                continue
            if has_labels:
                flag = row[label_col].strip()
                if flag not in ("", "0", "1"):
                    raise DataError(f"{path}: label must be 0 or 1, got {flag!r}")
                if flag == "1":
                    labels.add(len(values))
            timestamps.append(ts)
            values.append(val)

    if not values:
        raise DataError(f"{path}: no usable rows")
    return TimeSeries(np.array(timestamps), np.array(values), frozenset(labels)), rejected


def split_bounds(n: int, spec: SplitSpec) -> tuple[int, int]:
    """Segment boundaries: train is ``[0, i)``, validation ``[i, j)``,
    test ``[j, n)``. Integer remainders go to the test segment."""
    i = int(math.floor(n * spec.train_fraction))
    j = i + int(math.floor(n * spec.validation_fraction))
    return i, j


def split(series: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries, TimeSeries]:
    """Split chronologically into train/validation/test segments.

    Raises :class:`DataError` if a labeled anomaly lands in the training
    segment: the model must learn from anomaly-free data, so the caller has
    to move the split or fix the labels.
    """
    n = len(series)
    if n < 3:
        raise DataError("series too short to split (need >= 3 points)")
    i, j = split_bounds(n, spec)
    if i == 0:
        raise DataError("training segment is empty")
    train_labels = sorted(k for k in series.labels if k < i)
    if train_labels:
        raise DataError(
            f"anomaly in training segment at indices {train_labels}; "
            "move the split or re-label the data"
        )
    return series.segment(0, i), series.segment(i, j), series.segment(j, n)


def make_windows(series: TimeSeries, look_back: int, look_ahead: int) -> WindowSet:
    """All stride-1 (input, target) pairs of the given extents.

    A series of length ``n`` yields exactly ``n - look_back - look_ahead + 1``
    pairs.
    """
    if look_back < 1 or look_ahead < 1:
        raise DataError("look_back and look_ahead must be positive")
    n = len(series)
    m = n - look_back - look_ahead + 1
    if m < 1:
        raise DataError(
            f"series of length {n} too short for look_back={look_back}, "
            f"look_ahead={look_ahead}"
        )
    v = series.values
    inputs = np.lib.stride_tricks.sliding_window_view(v[: n - look_ahead], look_back).copy()
    targets = np.lib.stride_tricks.sliding_window_view(v[look_back:], look_ahead).copy()
    origins = np.arange(look_back, look_back + m, dtype=np.int64)
    return WindowSet(inputs, targets, origins)


def absolute_errors(actual, predicted, horizon_index: int = 0,
                    indices=None) -> ErrorSeries:
    """Element-wise ``|actual - predicted|`` at one prediction horizon.

    ``actual`` and ``predicted`` may be 1-D (single horizon) or 2-D
    ``(m, look_ahead)``, in which case ``horizon_index`` selects the column.
    ``indices`` optionally gives the parent-series index of each element
    (default ``0..m-1``).
    """
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape:
        raise DataError(f"length mismatch: actual {a.shape} vs predicted {p.shape}")
    if a.ndim == 2:
        if not 0 <= horizon_index < a.shape[1]:
            raise DataError(f"horizon_index {horizon_index} out of range")
        a = a[:, horizon_index]
        p = p[:, horizon_index]
    if indices is None:
        indices = np.arange(len(a), dtype=np.int64)
    return ErrorSeries(np.asarray(indices, dtype=np.int64), np.abs(a - p))


def write_split_manifest(path, series: TimeSeries, spec: SplitSpec) -> dict:
    """Dump split boundaries and labels to JSON for reproducibility."""
    i, j = split_bounds(len(series), spec)
    manifest = {
        "n": len(series),
        "train_end": i,
        "validation_end": j,
        "fractions": [spec.train_fraction, spec.validation_fraction, spec.test_fraction],
        "labels": sorted(series.labels),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def read_split_manifest(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"split manifest not found: {path}")
    manifest = json.loads(path.read_text())
    for key in ("n", "train_end", "validation_end", "labels"):
        if key not in manifest:
            raise DataError(f"{path}: malformed split manifest (missing {key!r})")
    return manifest
