#!/usr/bin/env python3
"""Write a small synthetic traffic-like dataset for trying out the CLI.

The series has a daily periodic profile with noise and a few injected
anomalous stretches (sudden drops/spikes) in the later half, marked in the
label column.

    python3 scripts/make_demo_data.py [out.csv] [--seed 0] [--length 2000]
"""

import argparse
import csv

import numpy as np


def synth_traffic(length: int = 2000, seed: int = 0,
                  anomaly_windows=((0.62, 6, -0.22), (0.78, 4, 0.28), (0.9, 5, -0.2))):
    """Returns (values, labels): a periodic series plus anomalous stretches.

    Each anomaly is (position fraction, width, relative level shift). Shifts
    are moderate multiples of the noise level, the regime where tail-based
    thresholds are informative.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    base = 65.0 + 8.0 * np.sin(2 * np.pi * t / 288.0) + 3.0 * np.sin(2 * np.pi * t / 96.0)
    values = base + rng.normal(0.0, 2.0, size=length) + rng.normal(0.0, 1.0) \
        + 1.5 * np.sin(2 * np.pi * t / 41.0)
    labels = np.zeros(length, dtype=int)
    for frac, width, shift in anomaly_windows:
        start = int(frac * length)
        values[start:start + width] += shift * 65.0
        labels[start:start + width] = 1
    return values, labels


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default="demo_traffic.csv")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--length", type=int, default=2000)
    args = ap.parse_args()

    values, labels = synth_traffic(args.length, args.seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value", "label"])
        for i, (v, l) in enumerate(zip(values, labels)):
            w.writerow([i, repr(float(v)), l])
    print(f"wrote {args.out} ({args.length} rows, "
          f"{int(labels.sum())} anomalous points)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
