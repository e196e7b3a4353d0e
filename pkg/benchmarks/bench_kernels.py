"""Time the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is executed on
identical stream states in both backends; outputs are compared before the
timings are reported.
"""

import argparse
import math
import time

import numpy as np

from seqdfo import _pykernels as py

try:
    from seqdfo import _ckernels as cy
except ImportError:
    raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")


def _cases(scale):
    c0 = 1.0 / (2.0 * math.e * 0.01)
    return {
        "normals": lambda k: k.RngStream(1).normals(200_000 * scale),
        "sphere_directions (n=10)": lambda k: k.sphere_directions(k.RngStream(2), 10, 20_000 * scale),
        "gaussian_walk_batch (C=0.01)": lambda k: k.gaussian_walk_batch(
            k.RngStream(3), 0.0, 1.0, -c0, c0, 100_000, 500 * scale),
        "decrease_walk": lambda k: k.decrease_walk(
            k.RngStream(4), 0.1, 2.0, 1.95, 1.0, -c0 * 10, c0 * 10, 100_000 * scale),
        "renewal_times": lambda k: k.renewal_times(
            k.RngStream(5), math.log(1.3), math.log(0.95), 3 / 14, 5_000 * scale, False, 10**7),
    }


def _timed(fn, kernels, repeats):
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(kernels)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=int, default=1, help="work multiplier")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    print(f"{'kernel':<30} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}  identical")
    for name, fn in _cases(args.scale).items():
        t_py, out_py = _timed(fn, py, 1)
        t_cy, out_cy = _timed(fn, cy, args.repeats)
        print(f"{name:<30} {t_py:>11.3f} {t_cy:>13.4f} {t_py / t_cy:>8.1f}  {_same(out_py, out_cy)}")


if __name__ == "__main__":
    main()
