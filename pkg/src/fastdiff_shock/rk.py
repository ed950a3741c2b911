"""Dormand-Prince 5(4) embedded pair with error-per-step control, scalar ODEs.

Integration stops at the first accepted step on which ``event(y)`` changes
sign; the crossing is located on the cubic Hermite interpolant of that step
and a final step is taken to land on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


class StepUnderflow(RuntimeError):
    pass


class NoCrossing(RuntimeError):
    pass


@dataclass
class Trajectory:
    z: np.ndarray
    y: np.ndarray
    n_rejected: int


def _step(rhs, z, y, k0, h):
    k = np.empty(7)
    k[0] = k0
    for i in range(1, 7):
        yi = y + h * np.dot(A[i], k[:i])
        k[i] = rhs(yi)
    y_new = y + h * np.dot(B5, k)
    err = h * np.dot(E, k)
    return y_new, err, k[6]


def _hermite(z0, y0, d0, z1, y1, d1, z):
    h = z1 - z0
    t = (z - z0) / h
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t * t * (3 - 2 * t)
    h11 = t * t * (t - 1)
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def integrate_until(rhs, z0, y0, direction, event, *, rtol=1e-10, atol=1e-14,
                    max_step=0.01, z_limit=1e4, h_min=1e-13):
    """Integrate ``y' = rhs(y)`` from ``(z0, y0)`` in ``direction`` (+1/-1)."""
    zs = [z0]
    ys = [y0]
    z, y = z0, y0
    f = rhs(y)
    h = direction * min(max_step, 1e-3)
    ev = event(y)
    rejected = 0
    while True:
        if abs(h) < h_min * (1 + abs(z)):
            raise StepUnderflow(f"step size underflow at z={z:.6g}, y={y:.6g}")
        if abs(z - z0) > z_limit:
            raise NoCrossing(f"no switchover before |z|={z_limit:g}")
        y_new, err, f_new = _step(rhs, z, y, f, h)
        scale = atol + rtol * max(abs(y), abs(y_new))
        ratio = abs(err) / scale if np.isfinite(y_new) else np.inf
        if ratio > 1.0:
            rejected += 1
            h *= max(MIN_FACTOR, SAFETY * ratio ** -0.2)
            continue
        ev_new = event(y_new)
        if ev_new * ev <= 0:
            z_hit = brentq(
                lambda zz: event(_hermite(z, y, f, z + h, y_new, f_new, zz)),
                min(z, z + h), max(z, z + h), xtol=1e-15, rtol=1e-15,
            )
            y_hit, _, _ = _step(rhs, z, y, f, z_hit - z)
            zs.append(z_hit)
            ys.append(y_hit)
            break
        z, y, f, ev = z + h, y_new, f_new, ev_new
        zs.append(z)
        ys.append(y)
        grow = MAX_FACTOR if ratio == 0 else min(MAX_FACTOR, SAFETY * ratio ** -0.2)
        h = direction * min(max_step, abs(h) * grow)
    return Trajectory(np.array(zs), np.array(ys), rejected)
