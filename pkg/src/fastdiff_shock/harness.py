"""Orchestration behind the command line: profile, simulate and sweep."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from fastdiff_shock.config import RunConfig
from fastdiff_shock.diagnostics import LEDGER_COLUMNS
from fastdiff_shock.flux import FluxModel
from fastdiff_shock.io import snapshot_name, write_columns, write_json, write_rows
from fastdiff_shock.profile import ProfileTable, build_profile, profile_summary
from fastdiff_shock.solver import SNAPSHOT_COLUMNS, TIMESERIES_COLUMNS, SimulationResult, run


def make_profile(cfg: RunConfig) -> ProfileTable:
    return build_profile(cfg.model, resolution=cfg.settings.profile_resolution)


def write_profile(cfg: RunConfig, out: str | Path, profile: ProfileTable | None = None) -> dict:
    out = Path(out)
    profile = profile or make_profile(cfg)
    z = profile.z_samples
    U, U1, U2, _, _ = profile.derivatives(z)
    write_columns(out / "profile.csv", {"z": z, "U": U, "Uz": U1, "Uzz": U2})
    summary = profile_summary(profile)
    summary["seed"] = cfg.seed
    write_json(out / "profile_summary.json", summary)
    return summary


def simulation_summary(cfg: RunConfig, res: SimulationResult) -> dict:
    ts = res.timeseries
    return {
        "seed": cfg.seed,
        "d0": res.d0,
        "d_final": ts[-1]["d"],
        "excess_mass": res.excess_mass,
        "xi_star": res.xi_star,
        "n_steps": res.n_steps,
        "final_sup_err": ts[-1]["sup_err"],
        "max_abs_mass_residual": max(abs(r["mass_residual"]) for r in ts),
        "shift_violations": res.shift_violations,
        "max_shift_margin": res.max_shift_margin,
        "floored_mass": res.floored_mass,
        "min_u": res.min_u,
        "max_u": res.max_u,
        "F_ratio": res.remainders.f_ratio,
        "G_ratio": res.remainders.g_ratio,
        "G_ratio_small_min": res.remainders.g_ratio_small_min,
        "G_ratio_small_max": res.remainders.g_ratio_small_max,
    }


def write_simulation(cfg: RunConfig, res: SimulationResult, out: str | Path) -> dict:
    out = Path(out)
    write_rows(out / "timeseries.csv", TIMESERIES_COLUMNS, res.timeseries)
    write_rows(out / "ledger.csv", LEDGER_COLUMNS, res.ledger.rows)
    for t, snap in sorted(res.snapshots.items()):
        write_columns(out / snapshot_name(t), {c: snap[c] for c in SNAPSHOT_COLUMNS})
    summary = simulation_summary(cfg, res)
    write_json(out / "summary.json", summary)
    return summary


def simulate(cfg: RunConfig, out: str | Path, profile: ProfileTable | None = None) -> SimulationResult:
    profile = profile or make_profile(cfg)
    res = run(cfg.settings, cfg.model, profile)
    write_simulation(cfg, res, out)
    return res


# sweep -----------------------------------------------------------------------

SWEEP_COLUMNS = ("m", "center", "status", "tail_exponent_fit", "tail_exponent_expected",
                 "tail_rel_err", "lambda_fit", "lambda_expected", "lambda_rel_err",
                 "d0", "d_inf", "final_sup_err", "message")


def _point_dir(m: float, center: float) -> str:
    return f"m{m:g}_center{center:g}"


def run_point(cfg: RunConfig, m: float, center: float, out: str) -> dict:
    """One sweep point; failures become a row instead of an exception."""
    row = {k: float("nan") for k in SWEEP_COLUMNS}
    row.update(m=m, center=center, status="ok", message="")
    try:
        model = FluxModel(cfg.model.kind, cfg.model.u_minus, m, cfg.model.coeffs)
        pcfg = replace(cfg, model=model, settings=replace(cfg.settings, center=center))
        pdir = Path(out) / _point_dir(m, center)
        profile = make_profile(pcfg)
        summ = write_profile(pcfg, pdir, profile)
        row.update(tail_exponent_fit=summ["right_exponent_fit"],
                   tail_exponent_expected=summ["right_exponent_expected"],
                   lambda_fit=summ["left_rate_fit"], lambda_expected=summ["lambda_minus"])
        row["tail_rel_err"] = abs(row["tail_exponent_fit"] / row["tail_exponent_expected"] - 1)
        row["lambda_rel_err"] = abs(row["lambda_fit"] / row["lambda_expected"] - 1)
        res = simulate(pcfg, pdir, profile)
        row.update(d0=res.d0, d_inf=res.timeseries[-1]["d"], final_sup_err=res.timeseries[-1]["sup_err"])
    except Exception as exc:  # recorded per point, the sweep continues
        row["status"] = "error"
        row["message"] = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return row


def sweep(cfg: RunConfig, out: str | Path, workers: int | None = None) -> list[dict]:
    out = Path(out)
    points = [(m, c) for m in cfg.sweep_m for c in cfg.sweep_center]
    workers = workers or cfg.sweep_workers or min(len(points), os.cpu_count() or 1)
    if workers <= 1:
        rows = [run_point(cfg, m, c, str(out)) for m, c in points]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_point, cfg, m, c, str(out)) for m, c in points]
            rows = [f.result() for f in futures]
    write_rows(out / "sweep.csv", SWEEP_COLUMNS, rows)
    return rows
