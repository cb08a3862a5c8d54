"""Time every hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs once untimed (numba compiles on first call), then the best
of N timed runs is reported for both backends, along with the speed-up.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from phfusion.image_core import _DIFF_X, _GAUSS_5
from phfusion.kernels import _numba, _numpy


def _cases():
    rng = np.random.default_rng(0)
    img = rng.random((240, 320))
    gx = _numpy.correlate_replicate(img, np.ascontiguousarray(_DIFF_X))
    gy = _numpy.correlate_replicate(img, np.ascontiguousarray(_DIFF_X.T))
    mag = np.hypot(gx, gy)
    nms = _numpy.nonmax_suppress(mag, gx, gy)
    ori = np.degrees(np.arctan2(gy, gx)) % 360.0
    xs, ys = np.meshgrid(np.arange(0, 320 - 15, 8), np.arange(0, 240 - 15, 8))
    xs, ys = xs.ravel().astype(np.int64), ys.ravel().astype(np.int64)
    desc = rng.random((10_000, 128))
    cen = rng.random((200, 128))
    X = np.concatenate([rng.normal(size=(150, 20)) - 0.3, rng.normal(size=(150, 20)) + 0.3])
    y = np.repeat([-1.0, 1.0], 150)
    K = X @ X.T
    gauss = np.ascontiguousarray(_GAUSS_5)
    hi = float(mag.max())
    return {
        "correlate_replicate 240x320, 5x5": lambda m: m.correlate_replicate(img, gauss),
        "nonmax_suppress 240x320": lambda m: m.nonmax_suppress(mag, gx, gy),
        "hysteresis 240x320": lambda m: m.hysteresis(nms, 0.1 * hi, 0.2 * hi),
        f"sift_histograms {len(xs)} patches": lambda m: m.sift_histograms(mag, ori, xs, ys, 16),
        "nearest_center 10000 x 200 words": lambda m: m.nearest_center(desc, cen),
        "smo_solve n=300 linear C=1": lambda m: m.smo_solve(K, y, 1.0, 1e-3, 10, 100_000, 0,
                                                             1e-12),
    }


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rows = []
    for name, call in _cases().items():
        t_numba = _best(lambda: call(_numba), args.repeat)
        t_numpy = _best(lambda: call(_numpy), args.repeat)
        rows.append((name, t_numba, t_numpy))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  {'speed-up':>8}")
    for name, a, b in rows:
        print(f"{name:<{width}}  {1e3 * a:10.3f}  {1e3 * b:10.3f}  {b / a:7.1f}x")


if __name__ == "__main__":
    main()
