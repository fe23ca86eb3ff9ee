import csv

import numpy as np
import pytest

from evtad.series import TimeSeries


def synth_traffic(length=1500, seed=0, noise=2.0,
                  anomaly_windows=((0.62, 6, -0.22), (0.78, 4, 0.28), (0.9, 5, -0.2))):
    """Periodic traffic-like series with labeled anomalous stretches.

    Anomalies are (position fraction, width, relative level shift); the
    defaults land them in the validation and test regions of a 50/25/25
    split.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    base = 65.0 + 8.0 * np.sin(2 * np.pi * t / 288.0) + 3.0 * np.sin(2 * np.pi * t / 96.0)
    values = base + rng.normal(0.0, noise, size=length) + 1.5 * np.sin(2 * np.pi * t / 41.0)
    labels = set()
    for frac, width, shift in anomaly_windows:
        start = int(frac * length)
        values[start:start + width] += shift * 65.0
        labels.update(range(start, start + width))
    return TimeSeries(t, values, frozenset(labels))


def write_series_csv(path, series: TimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value", "label"])
        for i in range(len(series)):
            w.writerow([int(series.timestamps[i]), repr(float(series.values[i])),
                        int(i in series.labels)])


@pytest.fixture
def traffic_csv(tmp_path):
    path = tmp_path / "traffic.csv"
    write_series_csv(path, synth_traffic())
    return path
