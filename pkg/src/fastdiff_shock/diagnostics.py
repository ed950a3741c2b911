"""Antiderivative perturbation, singular weights and the energy ledger.

The perturbation is measured through ``phi(x, t) = -int_x^inf (u - U(y - st - d)) dy``
so that ``phi_x = u - U``.  Weights are powers of the shifted profile::

    w1 = U^(1-3m)  w2 = U^-(1+m)  w3 = U^(m-3)  w4 = U^-2m
    w5 = U^-2      w6 = U^(2m-4)  w7 = U^(m-1)

and algebraic weights ``<xi - xi_star>^(beta+j)`` with ``xi = x - st - d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import binom

from fastdiff_shock.flux import FluxModel
from fastdiff_shock.profile import ProfileTable
from fastdiff_shock.shift import ShiftState, wall_gradient

WEIGHT_EXPONENTS = {
    "w1": lambda m: 1 - 3 * m,
    "w2": lambda m: -(1 + m),
    "w3": lambda m: m - 3,
    "w4": lambda m: -2 * m,
    "w5": lambda m: -2.0,
    "w6": lambda m: 2 * m - 4,
    "w7": lambda m: m - 1,
}

INSTANT_KEYS = ("phi_w1", "phix_w2", "phixx_w3", "h3_beta", "bdry_beta3")
DISSIPATION_KEYS = ("diss_w4", "diss_w5", "diss_w6", "diss_w7", "diss_h3w7", "diss_bdry")
LEDGER_COLUMNS = ("t",) + INSTANT_KEYS + DISSIPATION_KEYS + (
    "N", "N_sup", "sob_phi_Um", "sob_phix_U", "F_ratio", "G_ratio", "phi_wall", "mass_residual")


def _check_m(m):
    if not 0.5 < m < 1:
        raise ValueError(f"m={m!r} outside 1/2<m<1")


def compute_alphas(m: float) -> tuple[float, ...]:
    _check_m(m)
    q = 1 - m
    return ((3 * m - 1) / q, (1 + m) / q, (3 - m) / q, 2 * m / q, 2 / q, (4 - 2 * m) / q)


def eval_weight(which: str, U, m: float):
    U = np.asarray(U, dtype=float)
    if np.any(U <= 0):
        raise ValueError("weights need U > 0")
    return U ** WEIGHT_EXPONENTS[which](m)


def bracket(x):
    return np.sqrt(1 + np.asarray(x, dtype=float) ** 2)


def bracket_plus(x):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, np.sqrt(1 + x * x), 1.0)


@dataclass(frozen=True)
class WeightSpec:
    m: float
    xi_star: float
    beta: float | None = None

    def __post_init__(self):
        _check_m(self.m)
        top = (3 * self.m - 1) / (1 - self.m)
        beta = top if self.beta is None else float(self.beta)
        if not 0 < beta <= top:
            raise ValueError(f"beta={beta} outside (0, (3m-1)/(1-m)={top}]")
        object.__setattr__(self, "beta", beta)

    @property
    def alphas(self):
        return compute_alphas(self.m)


# finite differences ----------------------------------------------------------

def d1(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order first derivative with one-sided closures."""
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / 12
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / 12
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / 12
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / 12
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / 12
    return out / dx


def d2(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order second derivative with one-sided closures."""
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / 12
    out[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / 12
    out[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / 12
    out[-1] = (45 * f[-1] - 154 * f[-2] + 214 * f[-3] - 156 * f[-4] + 61 * f[-5] - 10 * f[-6]) / 12
    out[-2] = (10 * f[-1] - 15 * f[-2] - 4 * f[-3] + 14 * f[-4] - 6 * f[-5] + f[-6]) / 12
    return out / dx**2


@dataclass(frozen=True)
class PerturbationField:
    t: float
    x: np.ndarray
    xi: np.ndarray
    U: np.ndarray
    phi: np.ndarray
    phi_x: np.ndarray
    phi_xx: np.ndarray
    phi_xxx: np.ndarray
    phi_wall: float
    phi_xx_wall: float

    @property
    def mass_residual(self) -> float:
        return -self.phi_wall


def compute_phi(u: np.ndarray, x: np.ndarray, dx: float, profile: ProfileTable,
                shift: ShiftState) -> PerturbationField:
    """``phi`` and its derivatives on the cell-centred grid.

    ``phi`` is accumulated face by face from the right end (where it is 0),
    so its wall value equals minus the midpoint-rule mass residual exactly.
    """
    model = profile.model
    xi = x - model.s * shift.t - shift.d
    U, deficit = profile._evaluate(xi)
    phi_x = (u - model.u_minus) + deficit
    faces = np.zeros(u.size + 1)
    faces[:-1] = -np.cumsum((phi_x * dx)[::-1])[::-1]
    phi = 0.5 * (faces[:-1] + faces[1:])
    phi_xx = d1(phi_x, dx)
    phi_xxx = d2(phi_x, dx)
    zb = -model.s * shift.t - shift.d
    phi_xx_wall = wall_gradient(u, model.u_minus, dx) - float(profile.Uz(zb))
    return PerturbationField(shift.t, x, xi, U, phi, phi_x, phi_xx, phi_xxx,
                             float(faces[0]), float(phi_xx_wall))


# nonlinear remainders --------------------------------------------------------

def compute_F(model: FluxModel, U, phi_x):
    """``-[f(U + phi_x) - f(U) - f'(U) phi_x]``."""
    return -model.taylor_remainder(np.asarray(U, dtype=float), np.asarray(phi_x, dtype=float))


_G_SERIES = 8


def _g_kernel(m, r):
    # (1 + r)^m - 1 - m r, without cancellation for small r
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = np.abs(r) < 1e-3
    rs = r[small]
    acc = np.zeros_like(rs)
    for k in range(_G_SERIES, 1, -1):
        acc = (acc + binom(m, k)) * rs
    out[small] = acc * rs
    rb = r[~small]
    out[~small] = np.expm1(m * np.log1p(rb)) - m * rb
    return out


def compute_G(m: float, U, phi_x):
    """``(U + phi_x)^m - U^m - m phi_x U^(m-1)``."""
    U = np.asarray(U, dtype=float)
    phi_x = np.asarray(phi_x, dtype=float)
    if np.any(U <= 0) or np.any(U + phi_x <= 0):
        raise ValueError("G needs U > 0 and U + phi_x > 0")
    out = U**m * _g_kernel(m, phi_x / U)
    return out if out.ndim else float(out)


@dataclass
class RemainderTracker:
    """Running suprema of ``|F|/phi_x^2`` and ``|G| U^(2-m)/phi_x^2``."""

    model: FluxModel
    min_phi_x: float = 1e-8
    small_rel: float = 1e-2
    f_ratio: float = float("nan")
    g_ratio: float = float("nan")
    g_ratio_small_max: float = float("nan")
    g_ratio_small_min: float = float("nan")
    n_samples: int = 0
    n_small: int = 0
    max_abs_phi_x: float = 0.0

    def update(self, U, phi_x) -> tuple[float, float]:
        """Fold one snapshot in; returns its own ``(F-ratio, G-ratio)`` (nan if no samples)."""
        if phi_x.size:
            self.max_abs_phi_x = max(self.max_abs_phi_x, float(np.max(np.abs(phi_x))))
        sel = np.abs(phi_x) > self.min_phi_x
        if not np.any(sel):
            return float("nan"), float("nan")
        U = U[sel]
        h = phi_x[sel]
        m = self.model.m
        fr = np.abs(compute_F(self.model, U, h)) / h**2
        gr = np.abs(compute_G(m, U, h)) * U ** (2 - m) / h**2
        self.f_ratio = float(np.nanmax([self.f_ratio, fr.max()]))
        self.g_ratio = float(np.nanmax([self.g_ratio, gr.max()]))
        self.n_samples += int(sel.sum())
        small = np.abs(h) / U <= self.small_rel
        if np.any(small):
            self.g_ratio_small_max = float(np.nanmax([self.g_ratio_small_max, gr[small].max()]))
            self.g_ratio_small_min = float(np.nanmin([self.g_ratio_small_min, gr[small].min()]))
            self.n_small += int(small.sum())
        return float(fr.max()), float(gr.max())

    @property
    def applicable(self) -> bool:
        return self.n_samples > 0


def remainder_ratio_check(model: FluxModel, perts) -> RemainderTracker:
    tracker = RemainderTracker(model)
    for p in perts:
        tracker.update(p.U, p.phi_x)
    return tracker


def sobolev_ratio_check(pert: PerturbationField, m: float) -> dict:
    return {
        "sob_phi_Um": float(np.max(np.abs(pert.phi) / pert.U**m)),
        "sob_phix_U": float(np.max(np.abs(pert.phi_x) / pert.U)),
    }


# ledger ------------------------------------------------------------------------

def instantaneous_terms(pert: PerturbationField, dx: float, spec: WeightSpec, d0: float) -> dict:
    m, beta = spec.m, spec.beta
    U = pert.U
    ang = bracket(pert.xi - spec.xi_star)
    derivs = (pert.phi, pert.phi_x, pert.phi_xx, pert.phi_xxx)
    h3 = sum(np.sum(ang ** (beta + j) * derivs[j] ** 2) for j in range(4)) * dx
    return {
        "phi_w1": float(np.sum(eval_weight("w1", U, m) * pert.phi**2) * dx),
        "phix_w2": float(np.sum(eval_weight("w2", U, m) * pert.phi_x**2) * dx),
        "phixx_w3": float(np.sum(eval_weight("w3", U, m) * pert.phi_xx**2) * dx),
        "h3_beta": float(h3),
        "bdry_beta3": float((d0 + pert.t) ** (beta + 3) * pert.phi_xx_wall**2),
    }


def dissipation_integrands(pert: PerturbationField, dx: float, spec: WeightSpec, d0: float) -> dict:
    m, beta = spec.m, spec.beta
    U = pert.U
    w7 = eval_weight("w7", U, m)
    ang = bracket(pert.xi - spec.xi_star)
    derivs = (pert.phi_x, pert.phi_xx, pert.phi_xxx)
    # phi_xxxx is not resolved; the H^3-type family stops at phi_xxx
    h3w7 = sum(np.sum(ang ** (beta + j) * w7 * derivs[j] ** 2) for j in range(3)) * dx
    return {
        "diss_w4": float(np.sum(eval_weight("w4", U, m) * pert.phi_x**2) * dx),
        "diss_w5": float(np.sum(eval_weight("w5", U, m) * pert.phi_xx**2) * dx),
        "diss_w6": float(np.sum(eval_weight("w6", U, m) * pert.phi_xxx**2) * dx),
        "diss_w7": float(np.sum(w7 * pert.phi_x**2) * dx),
        "diss_h3w7": float(h3w7),
        "diss_bdry": float((d0 + pert.t) ** (beta + 3) * pert.phi_xx_wall**2),
    }


@dataclass
class EnergyLedger:
    spec: WeightSpec
    d0: float
    dx: float
    rows: list = field(default_factory=list)
    _last_t: float | None = None
    _last_integrand: dict | None = None
    _totals: dict = field(default_factory=lambda: {k: 0.0 for k in DISSIPATION_KEYS})
    _n_sup: float = 0.0

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows])


def ledger_update(ledger: EnergyLedger, pert: PerturbationField, extra: dict | None = None) -> EnergyLedger:
    inst = instantaneous_terms(pert, ledger.dx, ledger.spec, ledger.d0)
    integrand = dissipation_integrands(pert, ledger.dx, ledger.spec, ledger.d0)
    if ledger._last_t is not None:
        dt = pert.t - ledger._last_t
        for k in DISSIPATION_KEYS:
            ledger._totals[k] += 0.5 * dt * (integrand[k] + ledger._last_integrand[k])
    ledger._last_t = pert.t
    ledger._last_integrand = integrand
    row = {"t": pert.t, **inst, **ledger._totals}
    for k, v in row.items():
        if not math.isfinite(v):
            raise FloatingPointError(f"ledger component {k} is not finite at t={pert.t}")
    n_now = (sum(math.sqrt(inst[k]) for k in INSTANT_KEYS) + math.sqrt(ledger._totals["diss_bdry"]))
    ledger._n_sup = max(ledger._n_sup, n_now)
    row["N"] = n_now
    row["N_sup"] = ledger._n_sup
    row.update(sobolev_ratio_check(pert, ledger.spec.m))
    row["phi_wall"] = pert.phi_wall
    row["mass_residual"] = pert.mass_residual
    row["F_ratio"] = row["G_ratio"] = float("nan")
    if extra:
        row.update(extra)
    ledger.rows.append(row)
    return ledger
