"""Compiled vs numpy RK4 kernel on the torus spray.

    python benchmarks/bench_kernels.py [--rays 101] [--radius 4] [--step 0.001]
"""
import argparse
import math
import time

import numpy as np

from holotorsion.geodesic_lab import kernels
from holotorsion.geodesic_lab.surface import TORUS, metric_data, parse_surface, _schedule


def run(backend, md, init, step, n, last, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj, nvalid = kernels.rk4_batch(md.code, md.consts, md.outputs, init, step, n, last, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rays", type=int, default=101)
    ap.add_argument("--radius", type=float, default=4.0)
    ap.add_argument("--step", type=float, default=0.001)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    md = metric_data(parse_surface(TORUS))
    thetas = np.linspace(0.0, 2 * math.pi, args.rays)
    init = np.column_stack([np.zeros_like(thetas), np.full_like(thetas, math.pi / 2), np.cos(thetas), np.sin(thetas)])
    n, last, _ = _schedule(args.radius, args.step)
    print(f"torus spray: {args.rays} rays x {n} steps, {len(md.code)} registers")

    t_py, ref = run("python", md, init, args.step, n, last, args.repeat)
    print(f"  python  {t_py:8.3f} s")
    if not kernels.compiled_available():
        print("  cython  (not built)")
        return
    t_cy, traj = run("cython", md, init, args.step, n, last, args.repeat)
    diff = float(np.nanmax(np.abs(traj - ref)))
    print(f"  cython  {t_cy:8.3f} s   speedup {t_py / t_cy:5.1f}x   max |diff| {diff:.1e}")


if __name__ == "__main__":
    main()
