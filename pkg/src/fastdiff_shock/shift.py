"""Initial shift from the excess mass, and the boundary balance for d(t).

The shift keeps the integrated perturbation zero: with ``U_b = U(-s t - d)``,

    -d' U_b + f(u-) - f(U_b) = (u^(m-1) u_x - U^(m-1) U_z) at x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from fastdiff_shock.errors import ShiftInvariantError
from fastdiff_shock.profile import ProfileTable

SIMPSON_H = 2.5e-3


@dataclass(frozen=True)
class ShiftState:
    t: float
    d: float
    d_prime: float
    d0: float


def simpson(fun, a: float, b: float, h: float = SIMPSON_H) -> float:
    """Composite Simpson rule with at most ``h`` spacing."""
    if a == b:
        return 0.0
    n = max(2, int(np.ceil(abs(b - a) / h)))
    n += n % 2
    x = np.linspace(a, b, n + 1)
    y = fun(x)
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return float((b - a) / (3 * n) * np.dot(w, y))


def profile_mass(profile: ProfileTable, d: float) -> float:
    """``integral of U over (-d, 0)``."""
    return simpson(profile.U, -d, 0.0)


def solve_d0(profile: ProfileTable, initial_excess_mass: float) -> float:
    """Unique ``d0 >= 0`` with ``integral_{-d0}^0 U = initial_excess_mass``."""
    mass = float(initial_excess_mass)
    if mass < 0:
        raise ValueError(f"negative excess mass {mass!r}: d0 would be negative")
    if mass == 0:
        return 0.0
    tol = 1e-14 * (1 + mass)
    lo, hi = 0.0, max(1.0, mass / profile.model.u_minus)
    while profile_mass(profile, hi) < mass:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = profile_mass(profile, mid) - mass
        if abs(val) <= tol or hi - lo <= 4e-16 * hi:
            return mid
        if val < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def wall_gradient(u, u_minus: float, dx: float) -> float:
    """Second-order one-sided ``u_x(0)`` from the wall value and two cells."""
    return (9 * (u[0] - u_minus) - (u[1] - u_minus)) / (3 * dx)


def boundary_mismatch(u, dx: float, profile: ProfileTable, shift: ShiftState, m: float) -> float:
    """``B(t) = u-^(m-1) u_x(0,t) - U^(m-1) U_z`` at ``z = -s t - d``."""
    model = profile.model
    ux = wall_gradient(u, model.u_minus, dx)
    zb = -model.s * shift.t - shift.d
    Ub = float(profile.U(zb))
    Uz = float(profile.Uz(zb))
    return model.u_minus ** (m - 1) * ux - Ub ** (m - 1) * Uz


def d_prime_solve(profile: ProfileTable, shift: ShiftState, B: float) -> float:
    model = profile.model
    zb = -model.s * shift.t - shift.d
    Ub = float(profile.U(zb))
    if Ub <= 1e-14:
        raise ShiftInvariantError(f"U(-st-d) = {Ub:.3e} at t={shift.t}: shift left the profile")
    jump = float(model.flux_jump(Ub, profile.deficit(zb)))
    return (jump - B) / Ub


def shift_margin(shift: ShiftState, s: float) -> float:
    """``-s t/2 - d + d0``; must stay <= 0."""
    return -s * shift.t / 2 - shift.d + shift.d0


def check_shift(shift: ShiftState, profile: ProfileTable) -> None:
    s = profile.model.s
    margin = shift_margin(shift, s)
    if margin > 0:
        raise ShiftInvariantError(
            f"-st/2 - d(t) <= -d0 violated at t={shift.t:.17g}: "
            f"d={shift.d:.17g}, d0={shift.d0:.17g}, margin={margin:.3e}"
        )
    if shift.t > 0 and not (-s * shift.t - shift.d < -shift.d0):
        raise ShiftInvariantError(f"boundary trace point passed -d0 at t={shift.t:.17g}")
    if shift.d0 + shift.t > 0:
        ratio = abs(s * shift.t + shift.d) / (shift.d0 + shift.t)
        if not 0.5 <= ratio <= 2:
            raise ShiftInvariantError(f"|st+d|/(d0+t)={ratio:.6g} left [1/2, 2] at t={shift.t:.17g}")


def advance_shift(shift: ShiftState, d_prime: float, dt: float, s: float | None = None) -> ShiftState:
    """Trapezoidal update of ``d`` given the end-of-step derivative.

    With the shock speed ``s`` supplied, the bound ``-st/2 - d <= -d0`` is
    re-asserted on the new state.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    new = replace(shift, t=shift.t + dt, d=shift.d + dt * 0.5 * (shift.d_prime + d_prime),
                  d_prime=d_prime)
    if s is not None and shift_margin(new, s) > 0:
        raise ShiftInvariantError(
            f"-st/2 - d(t) <= -d0 violated at t={new.t:.17g}: d={new.d:.17g}, d0={new.d0:.17g}"
        )
    return new
