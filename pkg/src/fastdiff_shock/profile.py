"""Viscous shock profile of the fast-diffusion Burgers equation.

The profile solves ``U' = U^(1-m) (f(U) - s U)`` with ``U(-inf) = u-`` and
``U(+inf) = 0``, normalized by ``U(0) = u-/2``.  Away from the end states it
is integrated with an adaptive Dormand-Prince pair; within a relative
distance ``switch_rel`` of either end state it is replaced by the asymptotic
closed forms

    right:  U(z) = [(1-m)(s - f'(0))(z - z0)]^(-1/(1-m))
    left:   U(z) = u- - A exp(lambda_minus z)

whose free constants are fitted for continuity at the switchover points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from fastdiff_shock import rk
from fastdiff_shock.errors import ProfileError
from fastdiff_shock.flux import FluxModel

SWITCH_REL = 1e-3
RTOL = 1e-10


def ode_rhs(model: FluxModel, U):
    """``U^(1-m) g(U)``; defined on the open interval ``(0, u-)``."""
    U = np.asarray(U, dtype=float)
    if np.any((U <= 0) | (U >= model.u_minus)):
        raise ValueError(f"ode_rhs is defined for 0 < U < u-={model.u_minus}")
    out = _rhs(model, U, model.u_minus - U)
    return out if out.ndim else float(out)


def _rhs(model, U, deficit):
    return U ** (1 - model.m) * model.g(U, deficit)


def _rhs_scalar(model):
    a = 1 - model.m
    u_minus = model.u_minus

    def rhs(U):
        if not 0 < U:
            return np.nan
        return U**a * float(model.g(U, u_minus - U))

    return rhs


def _profile_derivatives(model: FluxModel, U, deficit):
    """``U', U'', U''', U''''`` along the profile, by differentiating the ODE."""
    a = 1 - model.m
    g0 = model.g(U, deficit)
    g1 = model.df(U) - model.s
    g2 = model.d2f(U)
    g3 = model.d3f(U)
    Ua = U**a
    R = Ua * g0
    R1 = a * Ua / U * g0 + Ua * g1
    R2 = a * (a - 1) * Ua / U**2 * g0 + 2 * a * Ua / U * g1 + Ua * g2
    R3 = (a * (a - 1) * (a - 2) * Ua / U**3 * g0 + 3 * a * (a - 1) * Ua / U**2 * g1
          + 3 * a * Ua / U * g2 + Ua * g3)
    U1 = R
    U2 = R1 * R
    U3 = R2 * R * R + R1 * R1 * R
    U4 = R3 * R**3 + 4 * R1 * R2 * R * R + R1**3 * R
    return U1, U2, U3, U4


@dataclass(frozen=True)
class ProfileTable:
    model: FluxModel
    z_ode: np.ndarray
    u_ode: np.ndarray
    z_samples: np.ndarray
    u_samples: np.ndarray
    lambda_minus: float
    z_switch_right: float
    z0: float
    z_switch_left: float
    log_amplitude: float
    z_min: float
    z_max: float
    resolution: int
    n_rejected: int = 0
    _spline: CubicHermiteSpline = field(repr=False, default=None)

    @property
    def anchor(self) -> float:
        return self.model.u_minus / 2

    @property
    def tail_rate(self) -> float:
        return (1 - self.model.m) * (self.model.s - float(self.model.df(0.0)))

    @property
    def tail_exponent(self) -> float:
        return 1 / (1 - self.model.m)

    def deficit(self, z):
        """``u- - U(z)``, accurate in the left tail where it underflows ``U``."""
        z = np.asarray(z, dtype=float)
        U, d = self._evaluate(z)
        return d

    def U(self, z):
        U, _ = self._evaluate(np.asarray(z, dtype=float))
        return U

    def _evaluate(self, z):
        u_minus = self.model.u_minus
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        U = np.empty_like(z)
        d = np.empty_like(z)
        left = z <= self.z_switch_left
        right = z >= self.z_switch_right
        mid = ~(left | right)
        d[left] = np.exp(self.log_amplitude + self.lambda_minus * z[left])
        U[left] = u_minus - d[left]
        U[right] = (self.tail_rate * (z[right] - self.z0)) ** (-self.tail_exponent)
        d[right] = u_minus - U[right]
        U[mid] = self._spline(z[mid])
        d[mid] = u_minus - U[mid]
        if scalar:
            return U[0], d[0]
        return U, d

    def Uz(self, z):
        U, d = self._evaluate(np.asarray(z, dtype=float))
        return _rhs(self.model, U, d)

    def Uzz(self, z):
        U, d = self._evaluate(np.asarray(z, dtype=float))
        model = self.model
        Uz = _rhs(model, U, d)
        return (1 - model.m) * Uz**2 / U + (model.df(U) - model.s) * U ** (1 - model.m) * Uz

    def derivatives(self, z):
        U, d = self._evaluate(np.asarray(z, dtype=float))
        return (U,) + _profile_derivatives(self.model, U, d)


def _hermite_monotone(z, u, du):
    delta = np.diff(u) / np.diff(z)
    alpha = du[:-1] / delta
    beta = du[1:] / delta
    return bool(np.all(alpha > 0) and np.all(beta > 0) and np.all(alpha**2 + beta**2 <= 9))


def build_profile(model: FluxModel, z_min: float | None = None, z_max: float | None = None,
                  resolution: int = 200, *, switch_rel: float = SWITCH_REL,
                  rtol: float = RTOL, rhs=None) -> ProfileTable:
    """Integrate the traveling-wave ODE out of the anchor ``U(0) = u-/2``.

    ``resolution`` is the number of table nodes per unit of ``z`` at least
    (the step size is capped at ``1/resolution``).  ``z_min``/``z_max`` only
    bound the exported sample table; queries beyond use the closed forms.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    if z_min is not None and z_max is not None and not z_min < 0 < z_max:
        raise ValueError("need z_min < 0 < z_max")
    u_minus = model.u_minus
    m = model.m
    rhs = rhs or _rhs_scalar(model)
    u_anchor = u_minus / 2
    thr = switch_rel * u_minus
    max_step = 1.0 / resolution
    limit = 1e4 if z_max is None else max(abs(z_max), 1e4)
    if not rhs(u_anchor) < 0:
        raise ProfileError(f"U_z = {rhs(u_anchor)!r} at the anchor; a shock profile needs U_z < 0")

    try:
        right = rk.integrate_until(rhs, 0.0, u_anchor, +1, lambda y: y - thr,
                                   rtol=rtol, max_step=max_step, z_limit=limit)
    except (rk.StepUnderflow, rk.NoCrossing) as exc:
        raise ProfileError(f"right endpoint (U -> 0): {exc}") from exc
    try:
        left = rk.integrate_until(rhs, 0.0, u_anchor, -1, lambda y: (u_minus - y) - thr,
                                  rtol=rtol, max_step=max_step, z_limit=limit)
    except (rk.StepUnderflow, rk.NoCrossing) as exc:
        raise ProfileError(f"left endpoint (U -> u-): {exc}") from exc

    z_ode = np.concatenate([left.z[:0:-1], right.z])
    u_ode = np.concatenate([left.y[:0:-1], right.y])
    slopes = _rhs(model, u_ode, u_minus - u_ode)
    if not np.all(np.diff(z_ode) > 0):
        raise ProfileError("non-increasing profile nodes")

    lam = model.lambda_minus
    a = 1 - m
    tail_rate = a * (model.s - float(model.df(0.0)))
    z_r, u_r = z_ode[-1], u_ode[-1]
    z0 = z_r - u_r ** (-a) / tail_rate
    z_l, u_l = z_ode[0], u_ode[0]
    log_amp = np.log(u_minus - u_l) - lam * z_l

    if z_min is None:
        # deficit ~ 1e-12 u- keeps U strictly below u- in double precision
        z_min = (np.log(1e-12 * u_minus) - log_amp) / lam
    if z_max is None:
        z_max = 1e4
    z_min = min(z_min, z_l - 1.0)
    z_max = max(z_max, z_r + 1.0)

    z_left = np.linspace(z_min, z_l, 201)[:-1]
    z_right = z0 + np.geomspace(z_r - z0, z_max - z0, 401)[1:]
    u_left = u_minus - np.exp(log_amp + lam * z_left)
    u_right = (tail_rate * (z_right - z0)) ** (-1 / a)

    spline = CubicHermiteSpline(z_ode, u_ode, slopes, extrapolate=False)
    return ProfileTable(
        model=model,
        z_ode=z_ode,
        u_ode=u_ode,
        z_samples=np.concatenate([z_left, z_ode, z_right]),
        u_samples=np.concatenate([u_left, u_ode, u_right]),
        lambda_minus=lam,
        z_switch_right=float(z_r),
        z0=float(z0),
        z_switch_left=float(z_l),
        log_amplitude=float(log_amp),
        z_min=float(z_min),
        z_max=float(z_max),
        resolution=resolution,
        n_rejected=left.n_rejected + right.n_rejected,
        _spline=spline,
    )


# queries --------------------------------------------------------------------

def eval_U(table: ProfileTable, z):
    return table.U(z)


def eval_Uz(table: ProfileTable, z):
    return table.Uz(z)


def eval_Uzz(table: ProfileTable, z):
    return table.Uzz(z)


def derivative_bound_ratios(table: ProfileTable) -> dict:
    m = table.model.m
    z = table.z_samples
    U, U1, U2, U3, U4 = table.derivatives(z)
    r1 = np.abs(U1) / U ** (2 - m)
    r2 = np.abs(U2) / U ** (3 - 2 * m)
    r3 = np.abs(U3) / U ** (4 - 3 * m)
    r4 = np.abs(U4) / U ** (5 - 4 * m)
    return {
        "r1": float(r1.max()),
        "r2": float(r2.max()),
        "r3": float(r3.max()),
        "r4": float(r4.max()),
        # |U_z|/U^(2-m) at the far right end of the table
        "r1_right_limit": float(r1[-1]),
        "r1_right_limit_expected": table.model.s - float(table.model.df(0.0)),
    }


def find_xi_star(table: ProfileTable, model: FluxModel | None = None, tol: float = 1e-10) -> float:
    """Root of ``f'(U(xi)) = s`` by bisection on the table range."""
    model = model or table.model
    if not float(model.df(0.0)) < model.s < float(model.df(model.u_minus)):
        raise ValueError("Lax condition f'(0) < s < f'(u-) fails; xi_star need not exist")

    def h(z):
        return float(model.df(table.U(z))) - model.s

    lo, hi = table.z_min, table.z_max
    if not (h(lo) > 0 > h(hi)):
        raise ValueError("xi_star is not bracketed by the profile table")
    mid = 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        val = h(mid)
        if abs(val) <= tol:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
    return mid


# verification helpers ------------------------------------------------------

def _fd_weights(offsets: np.ndarray) -> np.ndarray:
    """First-derivative weights on arbitrary stencils, one row per stencil."""
    n = offsets.shape[1]
    k = np.arange(n)
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1, n)]))
    V = offsets[:, None, :] ** k[None, :, None] / fact[None, :, None]
    rhs = np.zeros((offsets.shape[0], n))
    rhs[:, 1] = 1.0
    return np.linalg.solve(V, rhs[..., None])[..., 0]


def ode_residual(table: ProfileTable) -> float:
    """Max of ``|U_z - U^(1-m) g(U)| / (1 + |U_z|)`` over interior ODE nodes.

    ``U_z`` is a seven-point finite-difference derivative of the tabulated
    values, independent of the ODE right-hand side.
    """
    z, u = table.z_ode, table.u_ode
    idx = np.arange(3, len(z) - 3)
    stencil = idx[:, None] + np.arange(-3, 4)[None, :]
    offsets = z[stencil] - z[idx][:, None]
    weights = _fd_weights(offsets)
    du = np.sum(weights * u[stencil], axis=1)
    exact = _rhs(table.model, u[idx], table.model.u_minus - u[idx])
    return float(np.max(np.abs(du - exact) / (1 + np.abs(exact))))


def hermite_is_monotone(table: ProfileTable) -> bool:
    slopes = _rhs(table.model, table.u_ode, table.model.u_minus - table.u_ode)
    return _hermite_monotone(table.z_ode, table.u_ode, slopes)


def fit_right_exponent(table: ProfileTable) -> float:
    """Log-log slope of ``U`` against ``z`` over the last decade of the table."""
    z, u = table.z_samples, table.u_samples
    sel = z >= table.z_max / 10
    slope = np.polyfit(np.log(z[sel]), np.log(u[sel]), 1)[0]
    return float(-slope)


def fit_left_rate(table: ProfileTable) -> float:
    """Semilog slope of ``u- - U`` against ``z`` over its smallest decade."""
    z = table.z_samples
    d = table.deficit(z)
    sel = d <= 10 * d.min()
    return float(np.polyfit(z[sel], np.log(d[sel]), 1)[0])


def switch_local_exponent(table: ProfileTable) -> float:
    """``-(z - z0) U'/U`` at the right switchover, from the ODE slope."""
    z_r = table.z_switch_right
    u_r = table.u_ode[-1]
    slope = _rhs(table.model, u_r, table.model.u_minus - u_r)
    return float(-(z_r - table.z0) * slope / u_r)


def profile_summary(table: ProfileTable) -> dict:
    ratios = derivative_bound_ratios(table)
    return {
        "u_minus": table.model.u_minus,
        "m": table.model.m,
        "s": table.model.s,
        "lambda_minus": table.lambda_minus,
        "left_rate_fit": fit_left_rate(table),
        "right_exponent_expected": table.tail_exponent,
        "right_exponent_fit": fit_right_exponent(table),
        "switch_local_exponent": switch_local_exponent(table),
        "z0": table.z0,
        "log_amplitude_left": table.log_amplitude,
        "z_switch_left": table.z_switch_left,
        "z_switch_right": table.z_switch_right,
        "xi_star": find_xi_star(table),
        "ode_nodes": int(len(table.z_ode)),
        "ode_residual": ode_residual(table),
        **ratios,
    }
