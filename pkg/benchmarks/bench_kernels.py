"""Time the compiled and numpy power-sum kernels on realistic inputs.

    python3 benchmarks/bench_kernels.py [--n 8000] [--points 400] [--repeat 5]

The inputs are the log coefficients of the cubic test potential, so the
dynamic range matches what the kernel and spacing routines see.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from ringgas import backend, builtin_cubic, log_norm_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=8000)
    parser.add_argument("--points", type=int, default=400)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    pot = builtin_cubic(math.sqrt(3.0), 1.0)
    table = log_norm_table(pot, args.n)
    log_c = -math.log(2.0) - table.log_u
    j = table.j.astype(float)
    log_r = np.log(np.linspace(0.3, 0.9, args.points))
    s, phi = 2 * math.log(0.58), 0.01

    impls = backend.implementations()
    if "cython" not in impls:
        print("compiled kernels are not built; only the numpy fallback is timed")
    ref = impls["python"].diag_profile(log_c, j, log_r)
    print(f"n = {args.n}, diagonal points = {args.points}, best of {args.repeat}")
    print(f"{'backend':<8} {'power_sum [ms]':>15} {'diag_profile [ms]':>18} {'max |diff|':>11}")
    timings = {}
    for name, mod in impls.items():
        t_ps = min(timeit.repeat(lambda: mod.power_sum(log_c, j, s, phi), number=20,
                                 repeat=args.repeat)) / 20
        t_dp = min(timeit.repeat(lambda: mod.diag_profile(log_c, j, log_r), number=1,
                                 repeat=args.repeat))
        diff = float(np.max(np.abs(mod.diag_profile(log_c, j, log_r) - ref)))
        timings[name] = (t_ps, t_dp)
        print(f"{name:<8} {1e3 * t_ps:>15.3f} {1e3 * t_dp:>18.3f} {diff:>11.2e}")
    if "cython" in timings:
        (p_ps, p_dp), (c_ps, c_dp) = timings["python"], timings["cython"]
        print(f"speedup  {p_ps / c_ps:>15.2f} {p_dp / c_dp:>18.2f}")


if __name__ == "__main__":
    main()
