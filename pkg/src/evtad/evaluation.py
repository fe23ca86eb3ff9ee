"""Detection scoring: confusion counts and Precision/Recall/F1.

Ground truth may label single points or contiguous anomalous subsequences.
Runs of adjacent label indices are treated as one event: any flag inside an
event window (padded by the matching tolerance) detects it, and extra flags
inside an already-detected window are absorbed rather than counted as false
positives. Flags matching nothing are false positives.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DataError


@dataclass(frozen=True)
class MatchSpec:
    """How flags are matched to labels.

    tolerance: a flag within +/- this many timesteps of an event still
    counts. group_contiguous: treat runs of adjacent label indices as one
    event (the default); when False every labeled index is its own event.
    """

    tolerance: int = 0
    group_contiguous: bool = True

    def __post_init__(self):
        if self.tolerance < 0:
            raise DataError("matching tolerance must be >= 0")


@dataclass(frozen=True)
class ConfusionCounts:
    true_positives: int
    false_positives: int
    false_negatives: int

    def __post_init__(self):
        if min(self.true_positives, self.false_positives, self.false_negatives) < 0:
            raise DataError("confusion counts must be non-negative")


@dataclass(frozen=True)
class MetricsReport:
    detector_name: str
    series_name: str
    precision: float
    recall: float
    f1: float
    counts: ConfusionCounts
    degenerate: bool  # true when a zero denominator forced a metric to 0

    def to_dict(self) -> dict:
        return {
            "detector": self.detector_name,
            "series": self.series_name,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "true_positives": self.counts.true_positives,
            "false_positives": self.counts.false_positives,
            "false_negatives": self.counts.false_negatives,
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def group_events(labels) -> list[tuple[int, int]]:
    """Maximal runs of adjacent indices as inclusive (start, end) pairs."""
    idx = sorted(set(int(i) for i in labels))
    events = []
    for i in idx:
        if events and i == events[-1][1] + 1:
            events[-1][1] = i
        else:
            events.append([i, i])
    return [tuple(e) for e in events]


def match_detections(flags, labels, spec: MatchSpec = MatchSpec()) -> ConfusionCounts:
    """Greedy nearest-first matching of flags to labeled events.

    Each event is matched by at most one flag; unmatched events are false
    negatives. Flags inside the padded window of some event are never false
    positives (at most one of them scores the event, the rest are absorbed);
    flags outside every window are false positives.
    """
    flag_list = sorted(set(int(i) for i in flags))
    if spec.group_contiguous:
        events = group_events(labels)
    else:
        events = [(int(i), int(i)) for i in sorted(set(int(i) for i in labels))]

    tol = spec.tolerance
    # candidate (distance, flag_pos, event_pos) pairs within tolerance
    candidates = []
    in_any_window = [False] * len(flag_list)
    for fi, f in enumerate(flag_list):
        for ei, (start, end) in enumerate(events):
            if start - tol <= f <= end + tol:
                dist = max(0, start - f, f - end)
                candidates.append((dist, f, start, fi, ei))
                in_any_window[fi] = True
    candidates.sort()

    flag_used = [False] * len(flag_list)
    event_hit = [False] * len(events)
    for _, _, _, fi, ei in candidates:
        if not flag_used[fi] and not event_hit[ei]:
            flag_used[fi] = True
            event_hit[ei] = True

    tp = sum(event_hit)
    fn = len(events) - tp
    fp = sum(1 for fi in range(len(flag_list)) if not in_any_window[fi])
    return ConfusionCounts(tp, fp, fn)


def compute_metrics(counts: ConfusionCounts, detector_name: str = "",
                    series_name: str = "") -> MetricsReport:
    """Precision, recall and their harmonic mean from confusion counts.

    Zero-denominator cases yield zero and set the ``degenerate`` flag.
    """
    tp, fp, fn = counts.true_positives, counts.false_positives, counts.false_negatives
    degenerate = False
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return MetricsReport(detector_name, series_name, precision, recall, f1,
                         counts, degenerate)
