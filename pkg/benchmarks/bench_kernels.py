"""Compare the compiled and numpy backends on the flux hot loops.

Usage: python benchmarks/bench_kernels.py [--points 24] [--faces 61] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from ugks import kernels
from ugks.flux import FlatGrid
from ugks.kinetic import build_grid


def make_inputs(points, faces, seed=0):
    rng = np.random.default_rng(seed)
    fg = FlatGrid(build_grid(8.0, points))
    n, nv = faces, fg.u.size
    fm, f0, fp = (rng.random((n, nv)) for _ in range(3))
    dx = rng.uniform(0.1, 1.0, n)
    vl = (fm, f0, fp, dx, dx[::-1].copy())
    mf = (fg.u, fg.v, fg.w, f0, fm - fp, rng.uniform(0.5, 1.5, n), rng.normal(size=(n, 3)) * 0.2,
          rng.uniform(0.5, 1.5, n), rng.normal(size=(n, 3)) * 0.01, rng.normal(size=(n, 5)),
          rng.normal(size=(n, 5)), rng.normal(size=(n, 5)), rng.random((n, 5)), 2.0 / 3.0, 0.5,
          fg.weight)
    return vl, mf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=24)
    ap.add_argument("--faces", type=int, default=61)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    vl, mf = make_inputs(args.points, args.faces)
    names = sorted(kernels.BACKENDS)
    print(f"lattice {args.points}^3, {args.faces} faces; backends: {', '.join(names)}")
    results = {}
    for name in names:
        mod = kernels.BACKENDS[name]
        t_vl = min(timeit.repeat(lambda: mod.van_leer(*vl), number=1, repeat=args.repeat))
        t_mf = min(timeit.repeat(lambda: mod.micro_flux(*mf), number=1, repeat=args.repeat))
        results[name] = (t_vl, t_mf)
        print(f"{name:>8}: van_leer {t_vl * 1e3:8.2f} ms   micro_flux {t_mf * 1e3:8.2f} ms")
    if "cython" in results:
        a, b = results["python"], results["cython"]
        print(f" speedup: van_leer x{a[0] / b[0]:.2f}   micro_flux x{a[1] / b[1]:.2f}")
        F1, W1 = kernels.BACKENDS["python"].micro_flux(*mf)
        F2, W2 = kernels.BACKENDS["cython"].micro_flux(*mf)
        print(f"max |F_py - F_cy| / max|F| = {np.max(np.abs(F1 - F2)) / np.max(np.abs(F1)):.2e}")


if __name__ == "__main__":
    main()
