"""Hot loops of the solver: convective flux divergence and implicit diffusion.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one with the
same signature.  The numba path is used when numba imports and the
environment variable ``FASTDIFF_SHOCK_NUMBA`` is not ``0``.

Diffusion is solved for ``w = u^m`` on a cell-centred grid with Dirichlet data
on the two boundary faces::

    w^(1/m) - u_star - k L(w) = 0,     k = dt / (m dx^2)

where ``L`` is the second difference in the interior and the second-order
one-sided face gradient ``(-8 w_face + 9 w_0 - w_1) / 3`` closes each end.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded

LIMITERS = {"none": 0, "minmod": 1, "mc": 2}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("FASTDIFF_SHOCK_NUMBA", "1") != "0"


# numpy path -------------------------------------------------------------------

def _flux_np(u, c):
    return u * u * (c[0] + u * (c[1] + u * c[2]))


def _dflux_np(u, c):
    return u * (2 * c[0] + u * (3 * c[1] + u * 4 * c[2]))


def _slopes_np(u_ext, limiter):
    dl = u_ext[1:-1] - u_ext[:-2]
    dr = u_ext[2:] - u_ext[1:-1]
    if limiter == 0:
        return np.zeros_like(dl)
    if limiter == 1:
        return np.where(dl * dr > 0, np.sign(dl) * np.minimum(np.abs(dl), np.abs(dr)), 0.0)
    mag = np.minimum(np.minimum(2 * np.abs(dl), 2 * np.abs(dr)), 0.5 * np.abs(dl + dr))
    return np.where(dl * dr > 0, np.sign(dl) * mag, 0.0)


def convective_rhs_np(u_ext, coeffs, dx, limiter):
    # u_ext carries two ghost cells per side; slopes live on u_ext[1:-1]
    sigma = _slopes_np(u_ext, limiter)
    centre = u_ext[1:-1]
    uL = centre[:-1] + 0.5 * sigma[:-1]
    uR = centre[1:] - 0.5 * sigma[1:]
    alpha = np.maximum(np.abs(_dflux_np(uL, coeffs)), np.abs(_dflux_np(uR, coeffs)))
    F = 0.5 * (_flux_np(uL, coeffs) + _flux_np(uR, coeffs)) - 0.5 * alpha * (uR - uL)
    return -(F[1:] - F[:-1]) / dx


def _laplacian_np(w, wL, wR):
    out = np.empty_like(w)
    out[1:-1] = w[2:] - 2 * w[1:-1] + w[:-2]
    out[0] = (4 * w[1] - 12 * w[0] + 8 * wL) / 3
    out[-1] = (8 * wR - 12 * w[-1] + 4 * w[-2]) / 3
    return out


def diffusion_solve_np(u_star, w0, wL, wR, m, k, tol, max_iter):
    n = u_star.size
    w = w0.copy()
    inv_m = 1.0 / m
    ab = np.empty((3, n))
    iters = 0
    converged = False
    for iters in range(max_iter + 1):
        R = w**inv_m - u_star - k * _laplacian_np(w, wL, wR)
        if np.max(np.abs(R)) <= tol:
            converged = True
            break
        if iters == max_iter:
            break
        diag = inv_m * w ** (inv_m - 1) + 2 * k
        diag[0] += 2 * k
        diag[-1] += 2 * k
        ab[0, 1:] = -k
        ab[0, 1] = -4 * k / 3
        ab[1] = diag
        ab[2, :-1] = -k
        ab[2, -2] = -4 * k / 3
        delta = solve_banded((1, 1), ab, -R)
        lam = 1.0
        while np.any(w + lam * delta <= 0):
            lam *= 0.5
        w = w + lam * delta
    u_new = u_star + k * _laplacian_np(w, wL, wR)
    return u_new, iters, converged


# numba path -------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _flux_nb(u, c2, c3, c4):
        return u * u * (c2 + u * (c3 + u * c4))

    @numba.njit(cache=True)
    def _dflux_nb(u, c2, c3, c4):
        return u * (2 * c2 + u * (3 * c3 + u * 4 * c4))

    @numba.njit(cache=True)
    def _slope_nb(a, b, c, limiter):
        dl = b - a
        dr = c - b
        if limiter == 0 or dl * dr <= 0:
            return 0.0
        if limiter == 1:
            mag = min(abs(dl), abs(dr))
        else:
            mag = min(min(2 * abs(dl), 2 * abs(dr)), 0.5 * abs(dl + dr))
        return mag if dl > 0 else -mag

    @numba.njit(cache=True)
    def convective_rhs_nb(u_ext, coeffs, dx, limiter):
        n = u_ext.size - 4
        c2, c3, c4 = coeffs[0], coeffs[1], coeffs[2]
        out = np.empty(n)
        f_prev = 0.0
        for j in range(1, n + 2):
            # face between u_ext[j] and u_ext[j + 1]
            sl = _slope_nb(u_ext[j - 1], u_ext[j], u_ext[j + 1], limiter)
            sr = _slope_nb(u_ext[j], u_ext[j + 1], u_ext[j + 2], limiter)
            uL = u_ext[j] + 0.5 * sl
            uR = u_ext[j + 1] - 0.5 * sr
            alpha = max(abs(_dflux_nb(uL, c2, c3, c4)), abs(_dflux_nb(uR, c2, c3, c4)))
            F = 0.5 * (_flux_nb(uL, c2, c3, c4) + _flux_nb(uR, c2, c3, c4)) - 0.5 * alpha * (uR - uL)
            if j > 1:
                out[j - 2] = -(F - f_prev) / dx
            f_prev = F
        return out

    @numba.njit(cache=True)
    def _laplacian_nb(w, wL, wR, out):
        n = w.size
        for i in range(1, n - 1):
            out[i] = w[i + 1] - 2 * w[i] + w[i - 1]
        out[0] = (4 * w[1] - 12 * w[0] + 8 * wL) / 3
        out[n - 1] = (8 * wR - 12 * w[n - 1] + 4 * w[n - 2]) / 3

    @numba.njit(cache=True)
    def _thomas(lower, diag, upper, rhs, x, cp, dp):
        n = diag.size
        cp[0] = upper[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, n):
            den = diag[i] - lower[i] * cp[i - 1]
            cp[i] = upper[i] / den if i < n - 1 else 0.0
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
        x[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]

    @numba.njit(cache=True)
    def diffusion_solve_nb(u_star, w0, wL, wR, m, k, tol, max_iter):
        n = u_star.size
        inv_m = 1.0 / m
        w = w0.copy()
        lap = np.empty(n)
        R = np.empty(n)
        lower = np.full(n, -k)
        upper = np.full(n, -k)
        upper[0] = -4 * k / 3
        lower[n - 1] = -4 * k / 3
        diag = np.empty(n)
        delta = np.empty(n)
        cp = np.empty(n)
        dp = np.empty(n)
        iters = 0
        converged = False
        for iters in range(max_iter + 1):
            _laplacian_nb(w, wL, wR, lap)
            rmax = 0.0
            for i in range(n):
                R[i] = -(w[i] ** inv_m - u_star[i] - k * lap[i])
                rmax = max(rmax, abs(R[i]))
            if rmax <= tol:
                converged = True
                break
            if iters == max_iter:
                break
            for i in range(n):
                diag[i] = inv_m * w[i] ** (inv_m - 1) + 2 * k
            diag[0] += 2 * k
            diag[n - 1] += 2 * k
            _thomas(lower, diag, upper, R, delta, cp, dp)
            lam = 1.0
            while True:
                ok = True
                for i in range(n):
                    if w[i] + lam * delta[i] <= 0:
                        ok = False
                        break
                if ok:
                    break
                lam *= 0.5
            for i in range(n):
                w[i] += lam * delta[i]
        _laplacian_nb(w, wL, wR, lap)
        u_new = np.empty(n)
        for i in range(n):
            u_new[i] = u_star[i] + k * lap[i]
        return u_new, iters, converged


def convective_rhs(u_ext, coeffs, dx, limiter=2):
    if numba_enabled():
        return convective_rhs_nb(u_ext, coeffs, dx, limiter)
    return convective_rhs_np(u_ext, coeffs, dx, limiter)


def diffusion_solve(u_star, wL, wR, m, k, tol, max_iter, w0=None):
    """Return ``(u_new, newton_iterations, converged)``.

    ``w0`` is the Newton starting iterate (default ``u_star^m``).  ``u_new``
    is re-assembled from the conservative flux form at the final iterate, so
    the step conserves mass to round-off.
    """
    u_star = np.ascontiguousarray(u_star, dtype=np.float64)
    w0 = u_star**m if w0 is None else np.ascontiguousarray(w0, dtype=np.float64)
    if numba_enabled():
        return diffusion_solve_nb(u_star, w0, wL, wR, m, k, tol, max_iter)
    return diffusion_solve_np(u_star, w0, wL, wR, m, k, tol, max_iter)


def laplacian(w, wL, wR):
    """Boundary-closed second difference (times ``dx^2``) of ``w``."""
    return _laplacian_np(np.asarray(w, dtype=np.float64), wL, wR)
