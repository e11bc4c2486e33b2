"""Time the compiled kernels against the numpy fallback on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from loewner_lab import _kernels_py as py
from loewner_lab import kernels

try:
    from loewner_lab import _ckernels as cy
except ImportError:
    cy = None


def _drivings(rows, k, seed=0):
    rng = np.random.default_rng(seed)
    xi = np.zeros((rows, k + 1))
    xi[:, 1:] = np.cumsum(rng.normal(0, 0.03, (rows, k)), axis=1)
    return xi


def workloads():
    xi = _drivings(4, 1000)
    n = 256
    rows = np.arange(n, dtype=np.int64) % 4
    s_end = np.linspace(0.05, 1.0, n)
    flow = (kernels.CHORDAL, xi, rows, 1e-3, s_end.copy(), -1.0, 1.0, s_end,
            (0.1 + 0.5j) * np.ones(n), True, 0.1, 1e-14, np.zeros(0))
    radial = (kernels.RADIAL, xi, rows, 1e-3, np.zeros(n), 1.0, 1.0, s_end,
              (0.2 + 0.3j) * np.ones(n), True, 0.1, 1e-14, np.zeros(0))
    gron = (kernels.RADIAL, xi[0], xi[1], 1e-3, 1.0, 0.6 + 0.1j, 0.6 + 0.1j, 0.1, 1e-14, 0.2)
    mask = np.zeros((130, 130), dtype=np.uint8)
    mask[1:-1, 1:-1] = 1
    dirs = np.random.default_rng(1).integers(0, 4, 200_000).astype(np.uint8)
    codes = np.random.default_rng(2).integers(0, 5000, 200_000).astype(np.int64)
    rng = np.random.default_rng(3)
    pts = np.cumsum(rng.normal(0, 0.02, 20_000) + 1j * rng.normal(0, 0.02, 20_000))
    return {
        "flow_batch chordal reverse (256 pts, 1000 steps)": ("flow_batch", flow),
        "flow_batch radial forward (256 pts, 1000 steps)": ("flow_batch", radial),
        "gronwall_pair radial (1000 steps)": ("gronwall_pair", gron),
        "walk_chunk (2e5 steps)": ("walk_chunk", (mask, 64, 64, dirs)),
        "loop_erase_indices (2e5 sites)": ("loop_erase_indices", (codes, 5001)),
        "count_crossings (2e4 points)": ("count_crossings", (pts, 0j, 0.05, 0.3)),
    }


def best_of(fn, args, repeat):
    out = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        out = min(out, time.perf_counter() - t0)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    a = ap.parse_args(argv)
    results = []
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'workload':<52}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, (fn, args) in workloads().items():
        tp = best_of(getattr(py, fn), args, a.repeat)
        tc = best_of(getattr(cy, fn), args, a.repeat) if cy is not None else float("nan")
        results.append({"workload": name, "python": tp, "cython": tc, "speedup": tp / tc})
        print(f"{name:<52}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
