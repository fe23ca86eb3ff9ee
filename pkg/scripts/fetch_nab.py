#!/usr/bin/env python3
"""Download the three public traffic series used by the qualitative
acceptance checks (vehicular speed, travel time, occupancy) from the
Numenta Anomaly Benchmark repository, merge in the ground-truth anomaly
windows as a 0/1 label column, and write them under data/nab/.

    python3 scripts/fetch_nab.py [--dest data/nab]

Requires network access to raw.githubusercontent.com.
"""

import argparse
import csv
import io
import json
import sys
import urllib.request
from datetime import datetime
from pathlib import Path

RAW = "https://raw.githubusercontent.com/numenta/NAB/master"
SERIES = {
    "speed_7578": "data/realTraffic/speed_7578.csv",
    "TravelTime_387": "data/realTraffic/TravelTime_387.csv",
    "occupancy_6005": "data/realTraffic/occupancy_6005.csv",
}
LABELS = "labels/combined_windows.json"


def _get(url: str) -> bytes:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def _parse(ts: str) -> datetime:
    return datetime.fromisoformat(ts.split(".")[0])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dest", default=str(Path(__file__).resolve().parents[1]
                                          / "data" / "nab"))
    args = ap.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)

    windows = json.loads(_get(f"{RAW}/{LABELS}"))
    for name, repo_path in SERIES.items():
        raw = _get(f"{RAW}/{repo_path}").decode()
        spans = [(_parse(a), _parse(b))
                 for a, b in windows[repo_path.removeprefix("data/")]]
        out = dest / f"{name}.csv"
        n = labeled = 0
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["timestamp", "value", "label"])
            for row in csv.DictReader(io.StringIO(raw)):
                ts = _parse(row["timestamp"])
                flag = int(any(a <= ts <= b for a, b in spans))
                w.writerow([row["timestamp"], row["value"], flag])
                n += 1
                labeled += flag
        print(f"wrote {out}: {n} rows, {labeled} labeled points, "
              f"{len(spans)} anomaly windows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
