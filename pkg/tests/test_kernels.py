import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastdiff_shock import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def _ext(u, left, right):
    return np.concatenate([[left, left], u, [right, right]])


def test_env_flag(monkeypatch):
    monkeypatch.setenv("FASTDIFF_SHOCK_NUMBA", "0")
    assert not K.numba_enabled()
    monkeypatch.setenv("FASTDIFF_SHOCK_NUMBA", "1")
    assert K.numba_enabled() == K.HAVE_NUMBA


def test_laplacian_hand_value():
    # w = x^0.75 at cell centres x = 0.05, 0.15, ...; node at x = 1.05
    dx, m = 0.1, 0.75
    x = (np.arange(40) + 0.5) * dx
    lap = K.laplacian(x**m, 0.0, 4.0**m)
    hand = 1.15**0.75 - 2 * 1.05**0.75 + 0.95**0.75
    assert lap[10] == pytest.approx(hand, rel=1e-13)
    # continuum check: m (m-1) x^(m-2) dx^2
    assert hand == pytest.approx(0.75 * -0.25 * 1.05**-1.25 * dx**2, rel=1e-2)


def test_laplacian_boundary_closure_exact_for_quadratics():
    # one-sided face closure is exact for quadratics
    dx = 0.1
    x = (np.arange(20) + 0.5) * dx
    w = 1 + x + x**2
    lap = K.laplacian(w, 1.0, 1 + 2.0 + 4.0)
    assert np.allclose(lap, 2 * dx**2, atol=1e-13)


@pytest.mark.parametrize("flag", ["0", "1"])
def test_constant_state_is_fixed_point(monkeypatch, flag):
    monkeypatch.setenv("FASTDIFF_SHOCK_NUMBA", flag)
    c = 1.3
    u = np.full(50, c)
    rhs = K.convective_rhs(_ext(u, c, c), np.array([0.5, 0.1, 0.0]), 0.1)
    assert np.max(np.abs(rhs)) <= 1e-13
    u_new, iters, ok = K.diffusion_solve(u, c**0.75, c**0.75, 0.75, 5.0, 1e-12, 20)
    assert ok and iters == 0
    assert np.max(np.abs(u_new - c)) <= 1e-12


@pytest.mark.parametrize("flag", ["0", "1"])
def test_diffusion_conserves_mass(monkeypatch, flag):
    monkeypatch.setenv("FASTDIFF_SHOCK_NUMBA", flag)
    m, dx, dt = 0.75, 0.05, 0.02
    x = (np.arange(200) + 0.5) * dx
    u = 1 + 0.5 * np.exp(-((x - 5) ** 2))
    k = dt / (m * dx**2)
    u_new, _, ok = K.diffusion_solve(u, 1.0, 1.0, m, k, 1e-13, 50)
    assert ok
    # mass change equals the boundary fluxes computed from the final state
    w = u_new**m
    flux_in = k * ((8 * 1.0 - 9 * w[0] + w[1]) / 3 + (8 * 1.0 - 9 * w[-1] + w[-2]) / 3)
    assert np.sum(u_new) - np.sum(u) == pytest.approx(flux_in, abs=1e-11)
    assert np.all(u_new > 0)


def test_small_step_matches_explicit_difference():
    m, dx = 0.75, 0.1
    x = (np.arange(60) + 0.5) * dx
    u = 1 + 0.2 * np.sin(x)
    k = 1e-6
    u_new, _, ok = K.diffusion_solve(u, 1.0, (1 + 0.2 * np.sin(6.0)) ** m, m, k, 1e-15, 50)
    lap = K.laplacian(u**m, 1.0, (1 + 0.2 * np.sin(6.0)) ** m)
    assert ok
    assert np.allclose((u_new - u) / k, lap, rtol=1e-4, atol=1e-8)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), limiter=st.sampled_from([0, 1, 2]))
def test_numba_matches_numpy(seed, limiter):
    rng = np.random.default_rng(seed)
    n = 64
    u = 0.05 + 2 * rng.random(n)
    coeffs = np.array([0.5, rng.random() * 0.2, rng.random() * 0.05])
    ue = _ext(u, 2.0, 0.01)
    a = K.convective_rhs_np(ue, coeffs, 0.1, limiter)
    b = K.convective_rhs_nb(ue, coeffs, 0.1, limiter)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)
    w0 = u**0.75
    ua, ia, oka = K.diffusion_solve_np(u, w0, 2.0**0.75, 0.01**0.75, 0.75, 3.0, 1e-12, 50)
    ub, ib, okb = K.diffusion_solve_nb(u, w0, 2.0**0.75, 0.01**0.75, 0.75, 3.0, 1e-12, 50)
    assert oka and okb and ia == ib
    assert np.allclose(ua, ub, rtol=1e-11, atol=1e-12)


def test_limiters_reduce_to_first_order_on_monotone_steps():
    u = np.array([2.0, 2.0, 1.0, 0.0, 0.0])
    ue = _ext(u, 2.0, 0.0)
    for lim in K.LIMITERS.values():
        r = K.convective_rhs_np(ue, np.array([0.5, 0.0, 0.0]), 1.0, lim)
        # total conserved: fluxes telescope to the boundary values
        assert np.sum(r) == pytest.approx(-(0.0 - 2.0), abs=1e-14)

