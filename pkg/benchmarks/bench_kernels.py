#!/usr/bin/env python3
"""Benchmark the numba and pure-numpy quadrature kernels against each other.

The hot loop of the package is the panel evaluation of the oscillatory
response integrand; this script times both backends on panel sets sized
like the accelerated-trajectory runs behind the asymptote scans, plus an
end-to-end response evaluation at figure scale.

Run:  python benchmarks/bench_kernels.py
(set UDWITNESS_NO_NUMBA=1 to check what the package falls back to).
"""

import math
import time

import numpy as np

from udwitness import kernels
from udwitness.field import ModeSpec
from udwitness.response import CouplingSpec, chi_quadrature
from udwitness.trajectory import TrajectorySpec, wall_time


def time_fn(fn, *args, repeats=5):
    fn(*args)  # warmup (and jit compile)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def panel_cases():
    mode = ModeSpec(5000, 10000.0, 1.0)
    yield "inertial v=0.6, 20k panels", (
        kernels.KIND_INERTIAL,
        math.pi / 2,
        mode.k * math.pi * 0.6 / (mode.L * math.sqrt(1 - 0.36)),
        0.0,
        mode.omega,
    ), 20_000, 400.0
    for a, n in ((0.8, 25_000), (8.0, 25_000)):
        traj = TrajectorySpec.accelerated(a, 1.0, mode.L)
        yield f"accelerated a={a}, {n} panels", (
            kernels.KIND_ACCELERATED,
            math.pi / 2,
            a,
            mode.k * math.pi / (mode.L * a),
            mode.omega,
        ), n, wall_time(traj)


def main():
    print(f"active backend: {kernels.active_backend()}")
    print(f"{'case':<34}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, params, n, t_end in panel_cases():
        edges = np.linspace(0.0, t_end, n + 1)
        lo, hi = edges[:-1], edges[1:]
        t_np = time_fn(kernels.panel_integrals_numpy, *params, lo, hi)
        if kernels.panel_integrals_numba is not None:
            t_nb = time_fn(kernels.panel_integrals_numba, *params, lo, hi)
            print(f"{name:<34}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<34}{t_np * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")

    mode = ModeSpec(5000, 10000.0, 1.0)
    coup = CouplingSpec(2.0 * math.sqrt(5000.0))
    traj = TrajectorySpec.accelerated(0.8, 1.0, mode.L)
    tw = wall_time(traj)
    t = time_fn(lambda: chi_quadrature(mode, coup, traj, tw), repeats=3)
    print(
        f"\nend-to-end chi_quadrature (a=0.8, figure scale, active backend "
        f"{kernels.active_backend()}): {t * 1e3:.1f} ms"
    )


if __name__ == "__main__":
    main()
