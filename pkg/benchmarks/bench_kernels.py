"""Benchmark the compiled propagation kernel against the numpy fallback.

The hot loop of every spectral computation is the cell-by-cell propagation
of (y, y') across the potential grid, once per spectral point.  Run:

    python benchmarks/bench_kernels.py [--cells 2048] [--batch 512]
"""

import argparse
import time

import numpy as np

from specrecon.kernels import magnus_py

try:
    from specrecon.kernels import magnus_cy
except ImportError:
    magnus_cy = None


def trajectory_inputs(cells, batch, seed=0):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, np.pi, cells + 1)
    qg1 = np.cos(x[:-1] + 0.2 * np.pi / cells).astype(complex)
    qg2 = np.cos(x[:-1] + 0.8 * np.pi / cells).astype(complex)
    lam = (rng.uniform(0.5, 900, batch)
           + 1j * rng.uniform(-5, 5, batch)).astype(complex)
    y0 = np.zeros(batch, dtype=complex)
    dy0 = np.ones(batch, dtype=complex)
    return qg1, qg2, np.pi / cells, lam, y0, dy0


def run(impl, args, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = impl.propagate(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=2048)
    ap.add_argument("--batch", type=int, default=512)
    ns = ap.parse_args()

    args = trajectory_inputs(ns.cells, ns.batch)
    steps = ns.cells * ns.batch

    t_py, out_py = run(magnus_py, args)
    print(f"numpy fallback : {t_py * 1e3:9.2f} ms "
          f"({steps / t_py / 1e6:.1f} M cell-steps/s)")
    if magnus_cy is None:
        print("compiled kernel: not built")
        return
    t_cy, out_cy = run(magnus_cy, args)
    print(f"compiled kernel: {t_cy * 1e3:9.2f} ms "
          f"({steps / t_cy / 1e6:.1f} M cell-steps/s)")
    print(f"speedup        : {t_py / t_cy:.1f}x")
    err = max(np.max(np.abs(out_py[0] - out_cy[0])),
              np.max(np.abs(out_py[1] - out_cy[1])))
    scale = np.max(np.abs(out_py[0]))
    print(f"max deviation  : {err:.3e} (batch scale {scale:.3e})")


if __name__ == "__main__":
    main()
