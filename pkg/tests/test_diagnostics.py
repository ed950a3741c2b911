import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastdiff_shock.diagnostics import (LEDGER_COLUMNS, EnergyLedger, RemainderTracker, WeightSpec,
                                        bracket, bracket_plus, compute_alphas, compute_F, compute_G,
                                        compute_phi, d1, d2, eval_weight, ledger_update,
                                        sobolev_ratio_check)
from fastdiff_shock.shift import ShiftState


def test_alphas_hand_values():
    assert compute_alphas(0.75) == pytest.approx((5, 7, 9, 6, 8, 10), abs=1e-13)


@settings(max_examples=50)
@given(m=st.floats(0.501, 0.999))
def test_alpha_gap(m):
    a = compute_alphas(m)
    assert a[4] - a[3] == pytest.approx(2, abs=1e-9)


def test_alpha_continuity_at_half():
    assert compute_alphas(0.5 + 1e-9)[0] == pytest.approx(1, abs=1e-7)


@pytest.mark.parametrize("m", [0.5, 1.0])
def test_alphas_domain(m):
    with pytest.raises(ValueError):
        compute_alphas(m)


def test_weight_hand_values():
    assert eval_weight("w1", 0.5, 0.75) == pytest.approx(2.3784142300054421, rel=1e-14)
    assert eval_weight("w3", 0.5, 0.75) == pytest.approx(4.7568284600108843, rel=1e-14)
    assert eval_weight("w7", 0.5, 0.75) == pytest.approx(1.1892071150027211, rel=1e-14)
    for w in ("w1", "w2", "w3", "w4", "w5", "w6", "w7"):
        assert eval_weight(w, 1.0, 0.75) == 1.0


@settings(max_examples=50)
@given(U=st.floats(1e-6, 10.0), m=st.floats(0.51, 0.99))
def test_weight_identities(U, m):
    w = {k: float(eval_weight(k, U, m)) for k in ("w2", "w5", "w6", "w7")}
    assert w["w2"] * w["w7"] == pytest.approx(w["w5"], rel=1e-12)
    assert w["w6"] == pytest.approx(w["w5"] * w["w7"] ** 2, rel=1e-12)


def test_weight_needs_positive_U():
    with pytest.raises(ValueError):
        eval_weight("w1", 0.0, 0.75)


def test_brackets():
    assert bracket(0.0) == 1.0
    assert float(bracket(3.0)) == pytest.approx(np.sqrt(10))
    assert np.array_equal(bracket_plus(np.array([-5.0, 0.0])), [1.0, 1.0])
    assert float(bracket_plus(2.0)) == pytest.approx(np.sqrt(5))


def test_weight_spec_beta():
    assert WeightSpec(0.75, 0.0).beta == pytest.approx(5.0)
    with pytest.raises(ValueError):
        WeightSpec(0.75, 0.0, beta=6.0)
    with pytest.raises(ValueError):
        WeightSpec(0.75, 0.0, beta=0.0)


def test_finite_differences_fourth_order():
    errs = []
    for n in (100, 200):
        x = np.linspace(0, 1, n + 1)
        dx = x[1] - x[0]
        errs.append((np.max(np.abs(d1(np.sin(x), dx) - np.cos(x))),
                     np.max(np.abs(d2(np.sin(x), dx) + np.sin(x)))))
    assert errs[0][0] / errs[1][0] > 12
    assert errs[0][1] / errs[1][1] > 6  # closures are third order for d2
    x = np.linspace(0, 1, 11)
    assert np.allclose(d2(x**3, 0.1), 6 * x, atol=1e-11)


def test_F_burgers(burgers):
    assert compute_F(burgers, 1.0, 0.1) == pytest.approx(-0.005, rel=1e-14)
    assert compute_F(burgers, 1.0, 0.0) == 0.0


def test_G_values():
    assert compute_G(0.75, 1.0, 0.1) == pytest.approx(-0.00090050135605840062, rel=1e-13)
    assert compute_G(0.75, 1.0, 0.0) == 0.0
    # series branch against the closed form in extended precision
    r = 1e-5
    assert compute_G(0.75, 1.0, r) == pytest.approx(-0.75 * 0.25 / 2 * r**2 * (1 - r / 4 * 1.25 / 1.5 * 2),
                                                    rel=1e-8)


def test_G_domain():
    with pytest.raises(ValueError):
        compute_G(0.75, 1.0, -1.5)


@settings(max_examples=50)
@given(U=st.floats(1e-3, 3.0), r=st.floats(-0.9, 2.0))
def test_G_branches_agree(U, r):
    h = r * U
    got = compute_G(0.75, U, h)
    direct = (U + h) ** 0.75 - U**0.75 - 0.75 * h * U ** -0.25
    assert got == pytest.approx(direct, rel=1e-6, abs=1e-14 * U**0.75)


def test_remainder_tracker_burgers(burgers):
    tr = RemainderTracker(burgers)
    U = np.linspace(0.1, 2, 50)
    h = 1e-3 * np.sin(np.arange(50))
    fr, gr = tr.update(U, h)
    assert fr == pytest.approx(0.5, rel=1e-12) and tr.f_ratio == pytest.approx(0.5, rel=1e-12)
    assert tr.applicable
    assert tr.g_ratio_small_min == pytest.approx(0.75 * 0.25 / 2, rel=1e-2)


def test_remainder_tracker_empty(burgers):
    tr = RemainderTracker(burgers)
    fr, gr = tr.update(np.ones(5), np.zeros(5))
    assert np.isnan(fr) and np.isnan(gr) and not tr.applicable


def _translate(profile, nx=2000, L=100.0, d=10.0):
    dx = L / nx
    x = (np.arange(nx) + 0.5) * dx
    u = profile.U(x - d)
    return x, dx, u, ShiftState(0.0, d, 0.0, d)


def test_zero_perturbation(profile):
    # wall deep in the left tail, so pinning u(0) = u- costs nothing
    x, dx, u, shift = _translate(profile, d=40.0)
    pert = compute_phi(u, x, dx, profile, shift)
    for arr in (pert.phi, pert.phi_x, pert.phi_xx, pert.phi_xxx):
        assert np.max(np.abs(arr)) <= 1e-12
    sob = sobolev_ratio_check(pert, 0.75)
    assert sob["sob_phix_U"] <= 1e-10
    led = EnergyLedger(WeightSpec(0.75, 0.0), 40.0, dx)
    for t in (0.0, 0.5, 1.0):
        ledger_update(led, compute_phi(u, x, dx, profile, ShiftState(t, 40.0 - t, 0.0, 40.0)))
    # moving shift with st + d fixed keeps the same perturbation
    for key in LEDGER_COLUMNS[1:12]:
        assert np.max(np.abs(led.column(key))) <= 1e-10, key
    # N sums square roots of the entries above
    assert np.max(led.column("N")) <= 1e-5


def test_phi_wall_is_mass_residual(profile):
    x, dx, u, shift = _translate(profile)
    bump = 0.05 * np.clip(1 - ((x - 10) / 2) ** 2, 0, None) ** 3
    pert = compute_phi(u + bump, x, dx, profile, shift)
    assert pert.phi_wall == pytest.approx(-np.sum(bump) * dx, rel=1e-12)
    assert pert.mass_residual == -pert.phi_wall
    assert pert.phi[-1] == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(np.diff(pert.phi), 0.5 * (pert.phi_x[1:] + pert.phi_x[:-1]) * dx, atol=1e-15)


def test_dissipation_non_decreasing(profile):
    x, dx, u, shift = _translate(profile)
    led = EnergyLedger(WeightSpec(0.75, 0.0), 10.0, dx)
    for k, t in enumerate(np.linspace(0, 2, 9)):
        bump = 0.05 * np.exp(-k) * np.exp(-((x - 12) ** 2))
        ledger_update(led, compute_phi(u + bump, x, dx, profile, ShiftState(t, 10.0 - t, 0.0, 10.0)))
    for key in ("diss_w4", "diss_w5", "diss_w6", "diss_w7", "diss_h3w7", "diss_bdry"):
        assert np.all(np.diff(led.column(key)) >= 0)
    assert np.all(np.diff(led.column("N_sup")) >= 0)
    assert set(led.rows[0]) == set(LEDGER_COLUMNS)
