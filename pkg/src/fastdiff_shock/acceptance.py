"""The thirteen acceptance checks, shared by ``verify`` and the test suite.

``tolerance_scale`` multiplies every tolerance and bound factor and divides
every required decay ratio, so values below 1 tighten the suite.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from fastdiff_shock.config import RunConfig
from fastdiff_shock.diagnostics import DISSIPATION_KEYS, INSTANT_KEYS
from fastdiff_shock.errors import ProfileError
from fastdiff_shock.flux import FluxModel
from fastdiff_shock.harness import write_simulation
from fastdiff_shock.profile import (build_profile, derivative_bound_ratios, fit_left_rate,
                                    fit_right_exponent, hermite_is_monotone, ode_residual)
from fastdiff_shock.solver import SolverConfig, grid_refinement_study, run

N_PROBES = 100


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    required: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: measured {self.measured}; required {self.required}"


def _rel(a, b):
    return abs(a / b - 1)


# profile criteria --------------------------------------------------------------

def criterion_monotone(model: FluxModel, scale: float = 1.0, *, resolution: int = 200,
                       rhs=None) -> CriterionResult:
    tol = 1e-8 * scale
    try:
        table = build_profile(model, resolution=resolution, rhs=rhs)
    except (ProfileError, ValueError) as exc:
        return CriterionResult(1, "profile monotone, ODE residual", False,
                               f"profile construction failed ({exc})", f"residual <= {tol:g}")
    decreasing = bool(np.all(np.diff(table.u_samples) < 0)) and hermite_is_monotone(table)
    res = ode_residual(table)
    ok = decreasing and res <= tol
    return CriterionResult(1, "profile monotone, ODE residual", ok,
                           f"strictly decreasing={decreasing}, residual={res:.3e}",
                           f"strictly decreasing, residual <= {tol:g}")


def criterion_right_tail(model: FluxModel, sweep_m, scale: float = 1.0, resolution: int = 200):
    tol = 0.02 * scale
    parts, ok = [], True
    for m in (model.m,) + tuple(x for x in sweep_m if x != model.m):
        mm = FluxModel(model.kind, model.u_minus, m, model.coeffs)
        fit = fit_right_exponent(build_profile(mm, resolution=resolution))
        expect = 1 / (1 - m)
        ok &= _rel(fit, expect) <= tol
        parts.append(f"m={m:g}: {fit:.4f}/{expect:.4f}")
    return CriterionResult(2, "right-tail exponent", bool(ok), ", ".join(parts),
                           f"each within {100 * tol:g}% of 1/(1-m)")


def criterion_left_rate(table, scale: float = 1.0):
    tol = 0.02 * scale
    fit = fit_left_rate(table)
    lam = table.lambda_minus
    return CriterionResult(3, "left-tail rate", _rel(fit, lam) <= tol,
                           f"{fit:.6f} vs lambda-={lam:.6f}", f"within {100 * tol:g}%")


def criterion_derivative_ratios(table, scale: float = 1.0):
    tol = 0.02 * scale
    r = derivative_bound_ratios(table)
    finite = all(math.isfinite(r[k]) for k in ("r1", "r2", "r3", "r4"))
    ok = finite and _rel(r["r1_right_limit"], r["r1_right_limit_expected"]) <= tol
    return CriterionResult(
        4, "derivative-bound ratios", ok,
        f"r1..r4=({r['r1']:.4g}, {r['r2']:.4g}, {r['r3']:.4g}, {r['r4']:.4g}), "
        f"right limit {r['r1_right_limit']:.6f}",
        f"finite; limit within {100 * tol:g}% of s-f'(0)={r['r1_right_limit_expected']:.6g}")


def criterion_profile_resolution(table, model: FluxModel, scale: float = 1.0, resolution: int = 200):
    tol = 1e-7 * scale
    fine = build_profile(model, resolution=2 * resolution)
    lo = max(table.z_min, fine.z_min)
    hi = min(table.z_max, fine.z_max)
    # probes spread in the bulk and the algebraic tail
    half = N_PROBES // 2
    probes = np.concatenate([np.linspace(lo, 0.0, half, endpoint=False), np.geomspace(1e-3, hi, half)])
    a, b = table.U(probes), fine.U(probes)
    err = float(np.max(np.abs(a - b) / np.abs(b)))
    return err, tol


# run criteria ----------------------------------------------------------------

def criterion_mass(res, res_fine, scale: float = 1.0):
    tol = 1e-3 * res.model.u_minus * scale
    need = 3.0 / scale
    m0 = float(np.max(np.abs(res.series("mass_residual"))))
    m1 = float(np.max(np.abs(res_fine.series("mass_residual"))))
    ratio = m0 / m1 if m1 > 0 else math.inf
    ok = m0 <= tol and ratio >= need
    return CriterionResult(5, "mass residual / wall identity", ok,
                           f"max|M|={m0:.3e} (nx={res.grid.nx}), {m1:.3e} (nx={res_fine.grid.nx}), "
                           f"ratio {ratio:.3g}",
                           f"max|M| <= {tol:g}, ratio >= {need:g}")


def criterion_shift_bound(res):
    return CriterionResult(6, "shift bound", res.shift_violations == 0 and res.max_shift_margin <= 0,
                           f"{res.shift_violations} violations, max margin {res.max_shift_margin:.3e}",
                           "zero violations of -st/2-d <= -d0")


def _value_at(t, y, when):
    return float(np.interp(when, t, y))


def criterion_shift_convergence(res, scale: float = 1.0):
    t = res.series("t")
    T = t[-1]
    d = res.series("d")
    ia = res.series("int_abs_dprime")
    jump = abs(d[-1] - _value_at(t, d, T / 2))
    total = ia[-1]
    frac = (total - _value_at(t, ia, T / 2)) / total if total > 0 else 0.0
    ok = jump <= 1e-3 * scale and frac <= 0.05 * scale
    return CriterionResult(7, "shift convergence", ok,
                           f"|d(T)-d(T/2)|={jump:.3e}, late share of int|d'|={frac:.3e}",
                           f"<= {1e-3 * scale:g} and <= {0.05 * scale:g}")


def criterion_decay(res, transient: float, scale: float = 1.0):
    need = 10.0 / scale
    t = res.series("t")
    e = res.series("sup_err")
    sel = t >= transient
    peak = float(e[sel].max())
    ratio = peak / e[-1] if e[-1] > 0 else math.inf
    return CriterionResult(8, "decay to shifted profile", ratio >= need,
                           f"peak {peak:.3e} (t>={transient:g}) -> {e[-1]:.3e}, ratio {ratio:.3g}",
                           f"ratio >= {need:g}")


def criterion_remainders(res, scale: float = 1.0):
    tr = res.remainders
    model = res.model
    if not tr.applicable:
        return CriterionResult(9, "remainder ratios", False, "no samples with |phi_x| > 1e-8",
                               "non-empty sample set")
    if model.kind == "burgers":
        f_ok = abs(tr.f_ratio - 0.5) <= 1e-12 * scale
        f_req = f"F-ratio = 0.5 within {1e-12 * scale:g}"
    else:
        grid = np.linspace(0.0, model.u_minus + tr.max_abs_phi_x, 4001)
        top = float(np.max(np.abs(model.d2f(grid))))
        f_ok = tr.f_ratio <= 0.5 * top * (1 + 1e-12)
        f_req = f"F-ratio <= max|f''|/2 = {0.5 * top:g}"
    target = model.m * (1 - model.m) / 2
    g_ok = (tr.n_small > 0 and math.isfinite(tr.g_ratio)
            and _rel(tr.g_ratio_small_max, target) <= 0.25 * scale
            and _rel(tr.g_ratio_small_min, target) <= 0.25 * scale)
    return CriterionResult(
        9, "remainder ratios", bool(f_ok and g_ok),
        f"F-ratio {tr.f_ratio:.15g}, G-ratio small-limit range [{tr.g_ratio_small_min:.5f}, "
        f"{tr.g_ratio_small_max:.5f}] over {tr.n_small} samples, overall sup {tr.g_ratio:.5f}",
        f"{f_req}; G within {25 * scale:g}% of m(1-m)/2={target:g}")


def criterion_sobolev(res, scale: float = 1.0):
    factor = 3.0 * scale
    parts, ok = [], True
    for key in ("sob_phi_Um", "sob_phix_U"):
        c = res.ledger.column(key)
        growth = c.max() / c[0] if c[0] > 0 else math.inf
        ok &= bool(np.all(np.isfinite(c))) and growth <= factor
        parts.append(f"{key} max/initial={growth:.3g}")
    return CriterionResult(10, "Sobolev ratios bounded", bool(ok), ", ".join(parts),
                           f"<= {factor:g}")


def criterion_ledger(res, bound_factor: float, scale: float = 1.0):
    factor = bound_factor * scale
    share = 0.10 * scale
    t = res.ledger.column("t")
    worst_growth, worst_share, bad = 0.0, 0.0, []
    for key in INSTANT_KEYS:
        c = res.ledger.column(key)
        growth = c.max() / c[0] if c[0] > 0 else math.inf
        worst_growth = max(worst_growth, growth)
        if growth > factor:
            bad.append(key)
    for key in DISSIPATION_KEYS:
        c = res.ledger.column(key)
        total = c[-1]
        late = (total - _value_at(t, c, 0.75 * t[-1])) / total if total > 0 else 0.0
        worst_share = max(worst_share, late)
        if late > share:
            bad.append(key)
    return CriterionResult(11, "energy ledger bounded", not bad,
                           f"worst norm growth {worst_growth:.3g}, worst final-quarter share "
                           f"{worst_share:.3g}" + (f", failing: {', '.join(bad)}" if bad else ""),
                           f"growth <= {factor:g}, share <= {share:g}")


def criterion_oracle(table, model, cfg: RunConfig, scale: float = 1.0):
    err, tol = criterion_profile_resolution(table, model, scale, cfg.settings.profile_resolution)
    settings = replace(cfg.settings, t_end=cfg.refinement_t_end, snapshot_times=())
    ref = grid_refinement_study(settings, model, 3, table)
    lo, hi = 1.5 - 0.7 * scale, 1.5 + 0.7 * scale
    ok = err <= tol and lo <= ref.p <= hi
    return CriterionResult(
        12, "oracle equivalence", ok,
        f"profile 2x-resolution rel diff {err:.3e}; sup-errors {', '.join(f'{e:.3e}' for e in ref.errors)} "
        f"at nx={ref.nx}, p={ref.p:.3f}",
        f"rel diff <= {tol:g}, p in [{lo:g}, {hi:g}]"), ref


def criterion_determinism(cfg: RunConfig, res, table):
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp, "a"), Path(tmp, "b")
        write_simulation(cfg, res, a)
        write_simulation(cfg, run(cfg.settings, cfg.model, table), b)
        names = sorted(p.name for p in a.iterdir() if p.suffix == ".csv")
        same = [n for n in names if (a / n).read_bytes() == (b / n).read_bytes()]
    ok = len(same) == len(names) and names
    return CriterionResult(13, "determinism", bool(ok), f"{len(same)}/{len(names)} CSVs byte-identical",
                           "all byte-identical")


# driver ---------------------------------------------------------------------------

def fine_settings(cfg: RunConfig):
    s = cfg.settings
    solver = SolverConfig(**{**s.solver.__dict__, "dt_max": s.solver.dt_max / 2})
    return replace(s, nx=2 * s.nx, solver=solver, record_every=2 * s.record_every)


def run_acceptance(cfg: RunConfig, tolerance_scale: float = 1.0, log=None,
                   keep: dict | None = None) -> list[CriterionResult]:
    """Run every criterion; ``log`` receives one line per finished check.

    If ``keep`` is a dict it receives the profile table and the baseline and
    double-resolution runs under ``table``, ``base`` and ``fine``.
    """
    if not tolerance_scale > 0:
        raise ValueError("tolerance_scale must be positive")
    sc = tolerance_scale
    model = cfg.model
    res_list: list[CriterionResult] = []

    def add(r):
        res_list.append(r)
        if log:
            log(r.line())

    resolution = cfg.settings.profile_resolution
    add(criterion_monotone(model, sc, resolution=resolution))
    table = build_profile(model, resolution=resolution)
    add(criterion_right_tail(model, cfg.sweep_m, sc, resolution))
    add(criterion_left_rate(table, sc))
    add(criterion_derivative_ratios(table, sc))
    base = run(cfg.settings, model, table)
    fine = run(fine_settings(cfg), model, table)
    if keep is not None:
        keep.update(table=table, base=base, fine=fine)
    add(criterion_mass(base, fine, sc))
    add(criterion_shift_bound(base))
    add(criterion_shift_convergence(base, sc))
    add(criterion_decay(base, cfg.transient_time, sc))
    add(criterion_remainders(base, sc))
    add(criterion_sobolev(base, sc))
    add(criterion_ledger(base, cfg.bound_factor, sc))
    add(criterion_oracle(table, model, cfg, sc)[0])
    add(criterion_determinism(cfg, base, table))
    return sorted(res_list, key=lambda r: r.number)
