#!/usr/bin/env python3
"""Benchmark the hot kernels: numba-compiled vs pure numpy.

Runs each kernel through its compiled dispatcher and through the identical
Python source (``.py_func``), checks that the two paths agree, and prints
timings. With EVTAD_DISABLE_NUMBA=1 the package itself always takes the
plain-numpy path; this script measures what that costs.

    python3 benchmarks/bench_kernels.py [--repeats 30]
"""

import argparse
import time

import numpy as np

from evtad._accel import USING_NUMBA, py_func
from evtad._gpd import grimshaw_fit
from evtad._lstm import lstm_layer_backward, lstm_layer_forward
from evtad.evt import sample_gpd


def _time(fn, *args, repeats):
    fn(*args)  # warm-up / compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeats, out


def bench(name, fn, args, repeats, check=None):
    t_jit, out_jit = _time(fn, *args, repeats=repeats)
    t_py, out_py = _time(py_func(fn), *args, repeats=repeats)
    if check is not None:
        check(out_jit, out_py)
    speedup = t_py / t_jit if t_jit > 0 else float("nan")
    print(f"{name:<28} numba {t_jit * 1e3:9.3f} ms   numpy {t_py * 1e3:9.3f} ms   "
          f"speedup {speedup:5.1f}x")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=30)
    args = ap.parse_args()

    if not USING_NUMBA:
        print("numba disabled or unavailable; both columns run pure numpy")

    rng = np.random.default_rng(42)

    def close(a, b_):
        for u, v in zip(a if isinstance(a, tuple) else (a,),
                        b_ if isinstance(b_, tuple) else (b_,)):
            np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-12)

    # short windows, wide layer: matmul-bound, numpy is already near-optimal
    # long windows, narrow layer: loop-bound, where the jit pays off
    for label, (B, T, H) in [("64x24x80, loop-light", (64, 24, 80)),
                             ("8x1024x20, loop-heavy", (8, 1024, 20))]:
        x = rng.normal(size=(B, T, 1))
        W = rng.normal(scale=0.1, size=(4 * H, 1 + H))
        b = np.zeros(4 * H)
        xh, c, gates, _ = lstm_layer_forward(x, W, b)
        dh = rng.normal(size=(B, T, H))
        reps = args.repeats if T < 100 else max(args.repeats // 6, 3)
        bench(f"lstm fwd {label}", lstm_layer_forward, (x, W, b), reps, close)
        bench(f"lstm bwd {label}", lstm_layer_backward, (W, xh, c, gates, dh),
              reps, close)

    # tail MLE at bootstrap-resample size and at full-stream size
    for n in (400, 20000):
        y = sample_gpd(rng, 0.3, 2.0, n)
        y = np.ascontiguousarray(y / y.mean())
        reps = args.repeats if n <= 1000 else max(args.repeats // 6, 3)
        bench(f"gpd mle (n={n})", grimshaw_fit, (y,), reps, close)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
