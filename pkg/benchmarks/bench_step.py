"""Time one explicit step with the compiled kernel and with the numpy fallback.

    python3 benchmarks/bench_step.py --sizes 128 256 512 --repeat 20
"""
import argparse
import time

import numpy as np

from resonantcl import kernels
from resonantcl.scenarios import load_scenario
from resonantcl.solver import SolverConfig, SolverRun, stable_timestep


def setup(nx):
    sc = load_scenario("checkerboard_resonant")
    grid = sc.grid(nx)
    k, l, u0 = sc.fields(grid)
    cfg = SolverConfig.balanced(4.0 * grid.h / 16.0, 16.0)  # delta = 4h
    run = SolverRun.from_fields(cfg, sc.model, k, l, u0, track_psi=False)
    u = run.u.values.copy()
    rng = np.random.default_rng(0)
    u = np.clip(u + 0.1 * rng.random(u.shape), 0.0, 1.0)
    return run, u


def time_kernel(fn, run, u, dt, repeat):
    args = (run._kx, run._ly, run._ax, run._ay, run._pf, run._pg, run.model.a, dt,
            run.grid.h, run.config.epsilon)
    fn(u, *args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(u, *args)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out[0])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512])
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args(argv)

    if not kernels.HAVE_COMPILED:
        print("compiled kernel not built; only the numpy fallback is available")
    print(f"{'nx':>6s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s} {'max |diff|':>11s}")
    for nx in args.sizes:
        run, u = setup(nx)
        dt = stable_timestep(run)
        t_py, u_py = time_kernel(kernels.llf_step_py, run, u, dt, args.repeat)
        if kernels.HAVE_COMPILED:
            t_c, u_c = time_kernel(kernels.llf_step, run, u, dt, args.repeat)
            diff = float(np.abs(u_c - u_py).max())
            print(f"{nx:6d} {1e3 * t_py:12.3f} {1e3 * t_c:14.3f} {t_py / t_c:8.1f} {diff:11.2e}")
        else:
            print(f"{nx:6d} {1e3 * t_py:12.3f} {'-':>14s} {'-':>8s} {'-':>11s}")


if __name__ == "__main__":
    main()
