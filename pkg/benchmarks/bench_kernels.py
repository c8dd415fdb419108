"""Time each hot kernel under the compiled and the numpy backend.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N wall time for each backend and
the speedup, and checks that both backends return identical results.
"""
import argparse
import time

import numpy as np

from lvef._core import backends


def _cases(rng):
    series = np.cumsum(rng.normal(size=5000))
    peaks = backends()["python"].local_maxima(series)
    theta = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    xs = 100 + 80 * np.cos(theta) + rng.uniform(-3, 3, theta.size)
    ys = 120 + 100 * np.sin(theta) + rng.uniform(-3, 3, theta.size)
    order = np.argsort(rng.uniform(size=20000))
    x_sorted = np.sort(rng.uniform(size=20000))
    y = rng.normal(size=20000)
    w = rng.uniform(0.5, 1.5, size=20000)
    X = rng.uniform(size=(2000, 3))
    yt = X @ np.array([1.0, -2.0, 0.5]) + 0.1 * rng.normal(size=2000)
    u = rng.random(4 * X.size + 1)
    return {
        "local_maxima": lambda k: k.local_maxima(series),
        "peak_prominences": lambda k: k.peak_prominences(series, peaks),
        "select_by_distance": lambda k: k.select_by_distance(peaks, series[peaks], 20),
        "fill_polygon": lambda k: k.fill_polygon(xs, ys, 224, 256),
        "best_split": lambda k: k.best_split(x_sorted, y[order], w),
        "fit_random_tree": lambda k: k.fit_random_tree(X, yt, u, 0, -1, 2),
    }


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    found = backends()
    if "cython" not in found:
        print("compiled backend not built; only the numpy backend is available")
    cases = _cases(np.random.default_rng(args.seed))
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}  identical")
    for name, run in cases.items():
        t_py, out_py = _best(lambda: run(found["python"]), args.repeat)
        if "cython" in found:
            t_cy, out_cy = _best(lambda: run(found["cython"]), args.repeat)
            print(f"{name:<20}{t_py * 1e3:>14.3f}{t_cy * 1e3:>14.3f}{t_py / t_cy:>10.1f}  {_same(out_py, out_cy)}")
        else:
            print(f"{name:<20}{t_py * 1e3:>14.3f}{'-':>14}{'-':>10}  -")


if __name__ == "__main__":
    main()
