#!/usr/bin/env python3
"""Compare the compiled and pure-Python simulation kernels.

Runs the default frequency-response scenario with both backends, checks that
the outputs are bit-identical, and reports wall-clock timings.

Usage: python benchmarks/benchmark_kernels.py [--duration SECONDS]
"""
import argparse
import time

import numpy as np

from windgfm._kernel import _ode_py
from windgfm.config import DEFAULT_CONFIG, make_plant, make_surface
from windgfm.harness import Scenario, gains_for_scenario
from windgfm.plant import Mode, find_equilibrium

try:
    from windgfm._kernel import _ode_cy
except ImportError:
    _ode_cy = None


def run(kernel, x0, p_arr, duration, dt):
    n_steps = int(round(duration / dt))
    t0 = time.perf_counter()
    out = kernel.simulate(x0, p_arr, int(Mode.GFM_FR), dt, n_steps, 2,
                          2.0, (duration / 2,), (0.4,))
    return time.perf_counter() - t0, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--duration", type=float, default=20.0,
                    help="simulated seconds per run (default 20)")
    ap.add_argument("--dt", type=float, default=5e-4)
    args = ap.parse_args()

    cfg = DEFAULT_CONFIG
    plant = make_plant(cfg)
    surface = make_surface(cfg)
    sc = Scenario()
    design = gains_for_scenario(plant, surface, sc)
    x0, p_arr, _ = find_equilibrium(plant, design.gains, surface, sc.v_w,
                                    sc.load, sc.mode)

    n_steps = int(round(args.duration / args.dt))
    print(f"scenario: GFM_FR, {args.duration} s at dt={args.dt} "
          f"({n_steps} RK4 steps, 13 states)")

    t_py, out_py = run(_ode_py, x0, p_arr, args.duration, args.dt)
    print(f"python kernel:  {t_py:8.3f} s  "
          f"({n_steps / t_py / 1e3:7.1f} ksteps/s)")

    if _ode_cy is None:
        print("cython kernel:  not built (pip install -e . to compile)")
        return

    t_cy, out_cy = run(_ode_cy, x0, p_arr, args.duration, args.dt)
    print(f"cython kernel:  {t_cy:8.3f} s  "
          f"({n_steps / t_cy / 1e3:7.1f} ksteps/s)")
    print(f"speedup:        {t_py / t_cy:8.1f}x")
    identical = np.array_equal(out_py, out_cy)
    print(f"bit-identical outputs: {identical}")
    if not identical:
        raise SystemExit("backend outputs differ")


if __name__ == "__main__":
    main()
