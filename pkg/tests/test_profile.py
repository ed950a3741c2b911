"""Profile construction checked against a frozen mpmath oracle.

The oracle inverts the ODE: ``z(U) = int_{u-/2}^{U} dV / (V^(1-m) g(V))`` by
40-digit quadrature; values below are copied from it.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastdiff_shock.errors import ProfileError
from fastdiff_shock.flux import FluxModel
from fastdiff_shock.profile import (_rhs_scalar, build_profile, derivative_bound_ratios, eval_U,
                                    eval_Uz, eval_Uzz, find_xi_star, fit_left_rate,
                                    fit_right_exponent, hermite_is_monotone, ode_residual, ode_rhs,
                                    profile_summary, switch_local_exponent)

# Burgers, u- = 2, m = 0.75: (U, z(U)) inside the integrated region
ORACLE_BULK = [
    (1.9, -2.6461327559337704),
    (1.5, -1.0387599012978859),
    (0.5, 1.1926603309768858),
    (0.1, 3.8749516528578205),
    (0.01, 9.51099375919098),
    (0.002, 15.791534821413246),
]
# beyond the switchovers the leading-order closed forms are used
ORACLE_TAILS = [
    (1.999, -6.5721679103637406, 1e-6),
    (1e-4, 36.882343608296591, 1e-3),
    (1e-6, 123.37409561412901, 5e-4),
    (1e-9, 708.19477418626659, 1e-4),
]


def test_ode_rhs_values(burgers):
    assert ode_rhs(burgers, 1.0) == pytest.approx(-0.5, rel=1e-15)
    assert ode_rhs(burgers, 0.5) == pytest.approx(-0.31533615572014295, rel=1e-14)
    assert abs(ode_rhs(burgers, 2 - 1e-12)) < 1e-11


@pytest.mark.parametrize("U", [0.0, -1.0, 2.0, 3.0])
def test_ode_rhs_domain(burgers, U):
    with pytest.raises(ValueError):
        ode_rhs(burgers, U)


def test_anchor(profile):
    assert eval_U(profile, 0.0) == 1.0
    assert profile.anchor == 1.0


@pytest.mark.parametrize("U,z", ORACLE_BULK)
def test_oracle_bulk(profile, U, z):
    assert eval_U(profile, z) == pytest.approx(U, rel=1e-10)


@pytest.mark.parametrize("U,z,rel", ORACLE_TAILS)
def test_oracle_tails(profile, U, z, rel):
    assert eval_U(profile, z) == pytest.approx(U, rel=rel)


def test_limits(profile):
    assert eval_U(profile, 1e6) < 1e-15
    assert eval_U(profile, -60.0) == 2.0
    z = np.linspace(-40, 400, 5001)
    assert np.all(np.diff(eval_U(profile, z)) <= 0)


def test_table_invariants(profile):
    assert np.all(np.diff(profile.z_samples) > 0)
    assert np.all(np.diff(profile.u_samples) < 0)
    assert np.all((profile.u_samples > 0) & (profile.u_samples < 2))
    assert hermite_is_monotone(profile)
    assert ode_residual(profile) <= 1e-8


def test_switchover_continuity(profile):
    for zs in (profile.z_switch_left, profile.z_switch_right):
        inside = float(profile._spline(zs))
        closed = float(profile.U(zs + 1e-12 * (1 if zs > 0 else -1)))
        assert closed == pytest.approx(inside, rel=1e-6)
    assert profile.deficit(profile.z_switch_left) == pytest.approx(2e-3, rel=1e-9)
    assert profile.U(profile.z_switch_right) == pytest.approx(2e-3, rel=1e-9)


def test_Uzz_at_anchor(profile):
    # f'(1) = s, so only the first term survives
    assert eval_Uzz(profile, 0.0) == pytest.approx(0.0625, rel=1e-12)


def test_Uz_Uzz_at_half(profile):
    z = 1.1926603309768858
    assert eval_Uz(profile, z) == pytest.approx(-0.31533615572014295, rel=1e-9)
    # oracle: U_zz = (1-m) U_z^2/U + (f'(U)-s) U^(1-m) U_z at U = 0.5
    assert eval_Uzz(profile, z) == pytest.approx(0.18230096702465678, rel=1e-9)


def test_Uz_negative(profile):
    z = np.linspace(-30, 1000, 20001)
    assert np.all(eval_Uz(profile, z) < 0)


def test_higher_derivatives_match_differences(profile):
    z = np.linspace(-3, 6, 37)
    h = 1e-3
    U, U1, U2, U3, U4 = profile.derivatives(z)
    _, _, U2p, U3p, _ = profile.derivatives(z + h)
    _, _, U2m, U3m, _ = profile.derivatives(z - h)
    assert np.allclose((U2p - U2m) / (2 * h), U3, rtol=0, atol=1e-6)
    assert np.allclose((U3p - U3m) / (2 * h), U4, rtol=0, atol=1e-6)


def test_tail_fits(profile):
    assert fit_right_exponent(profile) == pytest.approx(4.0, rel=0.02)
    assert fit_left_rate(profile) == pytest.approx(1.189207115002721, rel=0.02)
    assert switch_local_exponent(profile) == pytest.approx(4.0, rel=0.02)


@pytest.mark.parametrize("m", [0.6, 0.75, 0.9])
def test_derivative_ratios_finite(m):
    model = FluxModel.burgers(2.0, m)
    r = derivative_bound_ratios(build_profile(model))
    assert all(np.isfinite(r[k]) for k in ("r1", "r2", "r3", "r4"))
    assert r["r1_right_limit"] == pytest.approx(1.0, rel=0.02)
    # supremum dominates the anchor value |g(u-/2)| / (u-/2)^(2-m)
    assert r["r1"] >= 0.5 - 1e-12


@pytest.mark.parametrize("m,expect", [(0.6, 2.5), (0.7, 10 / 3), (0.8, 5.0), (0.9, 10.0)])
def test_right_exponent_sweep(m, expect):
    assert fit_right_exponent(build_profile(FluxModel.burgers(2.0, m))) == pytest.approx(expect, rel=0.02)


def test_xi_star_burgers(profile):
    assert abs(find_xi_star(profile)) < 1e-9
    assert abs(find_xi_star(build_profile(FluxModel.burgers(3.0, 0.75)))) < 1e-9


def test_xi_star_polynomial(poly_profile):
    # oracle: U* solves U + 0.3 U^2 = 1.4, then z(U*) by quadrature
    assert find_xi_star(poly_profile) == pytest.approx(-0.076451807769311284, abs=1e-9)


def test_xi_star_requires_lax(profile):
    with pytest.raises(ValueError):
        find_xi_star(profile, FluxModel.polynomial((-0.5,), 2.0, 0.75))


def test_double_resolution_agreement(profile, burgers):
    fine = build_profile(burgers, resolution=400)
    probes = np.concatenate([np.linspace(-20, 0, 50, endpoint=False), np.geomspace(1e-3, 1e4, 50)])
    rel = np.abs(profile.U(probes) / fine.U(probes) - 1)
    assert rel.max() <= 1e-7


def test_resolution_validation(burgers):
    with pytest.raises(ValueError):
        build_profile(burgers, resolution=50)
    with pytest.raises(ValueError):
        build_profile(burgers, z_min=1.0, z_max=5.0)


def test_sign_error_mutation(burgers):
    bad = _rhs_scalar(burgers)
    with pytest.raises(ProfileError, match="U_z"):
        build_profile(burgers, rhs=lambda U: -bad(U))


def test_summary_keys(profile):
    s = profile_summary(profile)
    assert s["lambda_minus"] == pytest.approx(1.189207115002721, rel=1e-12)
    for k in ("r1", "r2", "r3", "r4", "right_exponent_fit", "left_rate_fit", "xi_star"):
        assert np.isfinite(s[k])


@settings(max_examples=15, deadline=None)
@given(m=st.floats(0.55, 0.95), u_minus=st.floats(0.5, 4.0), c3=st.floats(0.0, 0.3))
def test_profile_properties(m, u_minus, c3):
    model = FluxModel.polynomial((0.5, c3), u_minus, m)
    table = build_profile(model)
    assert np.all(np.diff(table.u_samples) < 0)
    assert table.U(0.0) == pytest.approx(u_minus / 2, rel=1e-15)
    assert ode_residual(table) <= 1e-8
    z = np.linspace(table.z_min, 50, 400)
    assert np.all(table.Uz(z) < 0)
