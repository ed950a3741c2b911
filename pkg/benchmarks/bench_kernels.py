"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--nx 4000] [--repeat 50]

Prints per-call times and the speed-up for the convective flux divergence,
the implicit diffusion solve and one full split step of the baseline problem.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from fastdiff_shock import _kernels as K
from fastdiff_shock.flux import FluxModel
from fastdiff_shock.profile import build_profile
from fastdiff_shock.shift import ShiftState, solve_d0
from fastdiff_shock.solver import Bump, Grid1D, SolverConfig, init_field, step


def _best(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    model = FluxModel.burgers(2.0, 0.75)
    profile = build_profile(model)
    grid = Grid1D(200.0, args.nx)
    field, excess = init_field(profile, grid, 20.0, Bump(0.05, 10.0, 2.0))
    d0 = solve_d0(profile, excess)
    shift = ShiftState(0.0, d0, 0.0, d0)
    u = field.u
    ue = np.concatenate([[2.0, 2.0], u, [u[-1], u[-1]]])
    coeffs = model.coeff_array
    m = model.m
    k = 0.01 / (m * grid.dx**2)
    w0 = u**m

    cases = {
        "convective_rhs": (lambda: K.convective_rhs_np(ue, coeffs, grid.dx, 2),
                           lambda: K.convective_rhs_nb(ue, coeffs, grid.dx, 2)),
        "diffusion_solve": (lambda: K.diffusion_solve_np(u, w0, 2.0**m, w0[-1], m, k, 1e-10, 50),
                            lambda: K.diffusion_solve_nb(u, w0, 2.0**m, w0[-1], m, k, 1e-10, 50)),
    }
    cfg = SolverConfig()

    def full_step():
        step(field, model, profile, shift, cfg, grid, 0.01)

    print(f"nx={args.nx}, best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speed-up':>10}")
    for name, (f_np, f_nb) in cases.items():
        a, b = _best(f_np, args.repeat), _best(f_nb, args.repeat)
        print(f"{name:<16}{1e3 * a:>12.3f}{1e3 * b:>12.3f}{a / b:>10.1f}")
    saved = os.environ.get("FASTDIFF_SHOCK_NUMBA")
    try:
        os.environ["FASTDIFF_SHOCK_NUMBA"] = "0"
        a = _best(full_step, args.repeat)
        os.environ["FASTDIFF_SHOCK_NUMBA"] = "1"
        b = _best(full_step, args.repeat)
    finally:
        if saved is None:
            os.environ.pop("FASTDIFF_SHOCK_NUMBA", None)
        else:
            os.environ["FASTDIFF_SHOCK_NUMBA"] = saved
    print(f"{'split step':<16}{1e3 * a:>12.3f}{1e3 * b:>12.3f}{a / b:>10.1f}")


if __name__ == "__main__":
    main()
