"""Finite-volume solver for ``u_t + f(u)_x = (1/m)(u^m)_xx`` on ``(0, L)``.

Left face: ``u = u_minus``.  Right face: the travelling profile value
``U(L - s t - d)``.  One step is a Strang split: convective half step
(MUSCL + local Lax-Friedrichs, SSP-RK2), implicit diffusion, convective half
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fastdiff_shock import _kernels
from fastdiff_shock.diagnostics import (EnergyLedger, RemainderTracker, WeightSpec,
                                        compute_phi, ledger_update)
from fastdiff_shock.errors import ConfigError, NewtonError
from fastdiff_shock.flux import FluxModel, check_admissibility
from fastdiff_shock.profile import ProfileTable, build_profile, find_xi_star
from fastdiff_shock.shift import (ShiftState, advance_shift, boundary_mismatch, check_shift,
                                  d_prime_solve, profile_mass, solve_d0)

FAR_FIELD_REL = 1e-6
WALL_REL = 1e-6
MAX_HALVINGS = 5
BUMP_MASS_FACTOR = 32.0 / 35.0
DIFFUSION_SCHEMES = ("trbdf2", "be")
GAMMA = 2 - math.sqrt(2)


@dataclass(frozen=True)
class Grid1D:
    L: float
    nx: int

    def __post_init__(self):
        if self.nx < 200:
            raise ConfigError(f"grid.nx={self.nx} must be >= 200")
        if not self.L > 0:
            raise ConfigError("grid.L must be positive")

    @property
    def dx(self) -> float:
        return self.L / self.nx

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx


@dataclass(frozen=True)
class Field:
    u: np.ndarray
    t: float


@dataclass(frozen=True)
class SolverConfig:
    dt_max: float = 0.01
    cfl: float = 0.4
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    floor: float = 1e-12
    limiter: str = "mc"
    diffusion: str = "trbdf2"

    def __post_init__(self):
        for name in ("dt_max", "cfl", "newton_tol", "newton_max_iters", "floor"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"solver.{name} must be positive")
        if self.limiter not in _kernels.LIMITERS:
            raise ConfigError(f"solver.limiter must be one of {sorted(_kernels.LIMITERS)}")
        if self.diffusion not in DIFFUSION_SCHEMES:
            raise ConfigError(f"solver.diffusion must be one of {DIFFUSION_SCHEMES}")


@dataclass(frozen=True)
class Bump:
    amplitude: float = 0.0
    center: float = 10.0
    width: float = 2.0

    def shape(self, x):
        r = (np.asarray(x, dtype=float) - self.center) / self.width
        return np.where(np.abs(r) < 1, (1 - r * r) ** 3, 0.0)

    @property
    def mass(self) -> float:
        return self.amplitude * self.width * BUMP_MASS_FACTOR


@dataclass(frozen=True)
class StepReport:
    dt: float
    newton_iters: int
    floored_mass: float
    mass_change: float
    boundary_flux_mass: float
    sup_err: float
    halvings: int


def minimum_center(profile: ProfileTable, rel: float = WALL_REL) -> float:
    """Smallest ``center`` with ``u_minus - U(-center) < rel * u_minus``."""
    target = rel * profile.model.u_minus
    lo, hi = 0.0, 1.0
    while profile.deficit(-hi) >= target:
        lo, hi = hi, 2 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if profile.deficit(-mid) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * hi:
            break
    return hi


def init_field(profile: ProfileTable, grid: Grid1D, center: float, bump: Bump) -> tuple[Field, float]:
    """Initial data ``U(x - center) + bump`` and its excess mass over ``U(x)``."""
    model = profile.model
    u_minus = model.u_minus
    if float(profile.deficit(-center)) >= WALL_REL * u_minus:
        need = minimum_center(profile)
        raise ConfigError(
            f"init.center={center} too small: |U(-center) - u-| must be < {WALL_REL:g}*u-; "
            f"need center >= {need:.6g}")
    if bump.amplitude != 0:
        if not bump.width > 0:
            raise ConfigError("init.bump.width must be positive")
        lo, hi = bump.center - bump.width, bump.center + bump.width
        if not (lo > 2 * bump.width and hi < grid.L / 2):
            raise ConfigError(
                f"bump support [{lo}, {hi}] must lie inside (2*width, L/2) = ({2 * bump.width}, {grid.L / 2})")
        zs = np.linspace(lo, hi, 201) - center
        u_min = float(np.min(profile.U(zs)))
        if abs(bump.amplitude) >= u_min:
            raise ConfigError(
                f"bump amplitude {bump.amplitude} not small against min U on its support ({u_min:.6g})")
    u0 = profile.U(grid.x - center) + bump.amplitude * bump.shape(grid.x)
    if np.any(u0 <= 0):
        raise ConfigError("initial data is non-positive somewhere")
    excess = profile_mass(profile, center) + bump.mass
    return Field(u0, 0.0), excess


def choose_dt(u: np.ndarray, model: FluxModel, grid: Grid1D, config: SolverConfig) -> float:
    speed = float(np.max(np.abs(model.df(u))))
    speed = max(speed, abs(float(model.df(model.u_minus))))
    return min(config.dt_max, config.cfl * grid.dx / speed) if speed > 0 else config.dt_max


def _right_state(profile: ProfileTable, x, t: float, d: float):
    return profile.U(np.asarray(x) - profile.model.s * t - d)


def _apply_floor(u: np.ndarray, floor: float, dx: float) -> float:
    low = u < floor
    if not np.any(low):
        return 0.0
    added = float(np.sum(floor - u[low]) * dx)
    u[low] = floor
    return added


def _convective_half(u, model, profile, grid, t, d, h, config, coeffs):
    dx = grid.dx
    ghost_x = grid.L + (np.array([0.5, 1.5])) * dx
    lim = _kernels.LIMITERS[config.limiter]
    u_ext = np.empty(u.size + 4)
    u_ext[:2] = model.u_minus

    def rhs(v, tau):
        u_ext[2:-2] = v
        u_ext[-2:] = _right_state(profile, ghost_x, tau, d)
        return _kernels.convective_rhs(u_ext, coeffs, dx, lim)

    u1 = u + h * rhs(u, t)
    return 0.5 * u + 0.5 * (u1 + h * rhs(u1, t + h))


def _flux_face(model, ul, ur):
    # boundary-face flux consistent with the LLF kernel for a first-order trace
    a = max(abs(float(model.df(ul))), abs(float(model.df(ur))))
    return 0.5 * (float(model.f(ul)) + float(model.f(ur))) - 0.5 * a * (ur - ul)


def _diffuse(u, profile, grid, t, d, dt, config):
    """Implicit diffusion over ``dt``: TR-BDF2, or backward Euler.

    Both stages of TR-BDF2 have the backward-Euler form
    ``w^(1/m) = rhs + k L(w)``; if a stage right-hand side is not positive
    the step falls back to backward Euler.
    """
    m = profile.model.m
    dx2 = grid.dx * grid.dx
    wL = profile.model.u_minus**m
    wR1 = float(_right_state(profile, grid.L, t + dt, d)) ** m
    tol, its = config.newton_tol, config.newton_max_iters
    if config.diffusion == "trbdf2":
        g = GAMMA
        wR0 = float(_right_state(profile, grid.L, t, d)) ** m
        wRg = float(_right_state(profile, grid.L, t + g * dt, d)) ** m
        w_n = u**m
        k1 = g * dt / (2 * m * dx2)
        rhs1 = u + k1 * _kernels.laplacian(w_n, wL, wR0)
        if np.all(rhs1 > 0):
            u_g, n1, ok1 = _kernels.diffusion_solve(rhs1, wL, wRg, m, k1, tol, its, w0=w_n)
            if not ok1:
                return u_g, n1, False
            c = 1.0 / (g * (2 - g))
            rhs2 = c * u_g - c * (1 - g) ** 2 * u
            if np.all(rhs2 > 0):
                k2 = (1 - g) / (2 - g) * dt / (m * dx2)
                w0 = np.maximum(u_g, config.floor) ** m
                u_new, n2, ok2 = _kernels.diffusion_solve(rhs2, wL, wR1, m, k2, tol, its, w0=w0)
                return u_new, n1 + n2, ok2
    return _kernels.diffusion_solve(u, wL, wR1, m, dt / (m * dx2), tol, its)


def step(field: Field, model: FluxModel, profile: ProfileTable, shift: ShiftState,
         config: SolverConfig, grid: Grid1D, dt: float) -> tuple[Field, StepReport]:
    """Advance one Strang step, halving ``dt`` on Newton failure."""
    coeffs = model.coeff_array
    dx = grid.dx
    t, d = field.t, shift.d
    for halving in range(MAX_HALVINGS + 1):
        floored = 0.0
        u = _convective_half(field.u, model, profile, grid, t, d, dt / 2, config, coeffs)
        floored += _apply_floor(u, config.floor, dx)
        u_new, iters, ok = _diffuse(u, profile, grid, t, d, dt, config)
        if ok and np.all(np.isfinite(u_new)):
            break
        if halving == MAX_HALVINGS:
            raise NewtonError(
                f"Newton failed to reach {config.newton_tol:g} at t={t:.17g} after {MAX_HALVINGS} dt halvings")
        dt *= 0.5
    floored += _apply_floor(u_new, config.floor, dx)
    u_new = _convective_half(u_new, model, profile, grid, t + dt / 2, d, dt / 2, config, coeffs)
    floored += _apply_floor(u_new, config.floor, dx)
    mass_change = float(np.sum(u_new - field.u) * dx)
    # net inflow through the two faces, trapezoid in time, first-order traces
    uR0 = float(_right_state(profile, grid.L, t, d))
    uR1 = float(_right_state(profile, grid.L, t + dt, d))
    f_in = 0.5 * (_flux_face(model, model.u_minus, field.u[0]) + _flux_face(model, model.u_minus, u_new[0]))
    f_out = 0.5 * (_flux_face(model, field.u[-1], uR0) + _flux_face(model, u_new[-1], uR1))
    boundary_flux = dt * (f_in - f_out)
    U_sh = _right_state(profile, grid.x, t + dt, d)
    sup_err = float(np.max(np.abs(u_new - U_sh)))
    new = Field(u_new, t + dt)
    return new, StepReport(dt, int(iters), floored, mass_change, boundary_flux, sup_err, halving)


# run -----------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSettings:
    L: float = 200.0
    nx: int = 4000
    t_end: float = 40.0
    center: float = 20.0
    bump: Bump = Bump(0.05, 10.0, 2.0)
    solver: SolverConfig = SolverConfig()
    snapshot_times: tuple = ()
    record_every: int = 10
    beta: float | None = None
    seed: int = 0
    profile_resolution: int = 200

    def __post_init__(self):
        if not self.t_end > 0:
            raise ConfigError("run.t_end must be positive")
        if self.record_every < 1:
            raise ConfigError("ledger.record_every must be >= 1")
        for ts in self.snapshot_times:
            if not 0 <= ts <= self.t_end:
                raise ConfigError(f"snapshot time {ts} outside [0, t_end]")


TIMESERIES_COLUMNS = ("t", "d", "dprime", "Ub", "B", "sup_err", "mass_residual", "phi_wall",
                      "floored_mass", "newton_iters", "int_abs_dprime", "shift_margin", "step")
SNAPSHOT_COLUMNS = ("x", "u", "U_shifted", "phi", "phi_x")


@dataclass
class SimulationResult:
    settings: RunSettings
    model: FluxModel
    profile: ProfileTable
    grid: Grid1D
    d0: float
    excess_mass: float
    xi_star: float
    timeseries: list = field(default_factory=list)
    ledger: EnergyLedger | None = None
    snapshots: dict = field(default_factory=dict)
    remainders: RemainderTracker | None = None
    final: Field | None = None
    n_steps: int = 0
    shift_violations: int = 0
    max_shift_margin: float = -math.inf
    floored_mass: float = 0.0
    max_u: float = 0.0
    min_u: float = math.inf

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.timeseries], dtype=float)


def validate_far_field(profile: ProfileTable, settings: RunSettings, d0: float) -> None:
    model = profile.model
    zR = settings.L - model.s * settings.t_end - d0
    trace = float(profile.U(zR))
    if not trace < FAR_FIELD_REL * model.u_minus:
        raise ConfigError(
            f"grid.L={settings.L} too short: U(L - s t_end - d0) = {trace:.3e} "
            f">= {FAR_FIELD_REL:g}*u-")


def _snapshot(pert, u):
    return {"x": pert.x, "u": u.copy(), "U_shifted": pert.U, "phi": pert.phi, "phi_x": pert.phi_x}


def run(settings: RunSettings, model: FluxModel, profile: ProfileTable | None = None) -> SimulationResult:
    """Integrate to ``t_end``; records diagnostics every ``record_every`` steps."""
    adm = check_admissibility(model)
    if not adm.ok:
        raise ConfigError(f"flux is not admissible: {adm}")
    if profile is None:
        profile = build_profile(model, resolution=settings.profile_resolution)
    grid = Grid1D(settings.L, settings.nx)
    cfg = settings.solver
    field_, excess = init_field(profile, grid, settings.center, settings.bump)
    d0 = solve_d0(profile, excess)
    validate_far_field(profile, settings, d0)
    xi_star = find_xi_star(profile)
    spec = WeightSpec(model.m, xi_star, settings.beta)
    ledger = EnergyLedger(spec, d0, grid.dx)
    tracker = RemainderTracker(model)
    s = model.s

    shift = ShiftState(0.0, d0, 0.0, d0)
    B = boundary_mismatch(field_.u, grid.dx, profile, shift, model.m)
    shift = ShiftState(0.0, d0, d_prime_solve(profile, shift, B), d0)
    res = SimulationResult(settings, model, profile, grid, d0, excess, xi_star,
                           ledger=ledger, remainders=tracker)
    snaps = sorted(set(float(t) for t in settings.snapshot_times))
    int_abs = 0.0
    floored_total = 0.0

    def record(step_no, iters, B):
        pert = compute_phi(field_.u, grid.x, grid.dx, profile, shift)
        f_ratio, g_ratio = tracker.update(pert.U, pert.phi_x)
        ledger_update(ledger, pert, {"F_ratio": f_ratio, "G_ratio": g_ratio})
        zb = -s * shift.t - shift.d
        margin = -s * shift.t / 2 - shift.d + d0
        res.timeseries.append({
            "t": shift.t, "d": shift.d, "dprime": shift.d_prime, "Ub": float(profile.U(zb)), "B": B,
            "sup_err": float(np.max(np.abs(pert.phi_x))), "mass_residual": pert.mass_residual,
            "phi_wall": pert.phi_wall, "floored_mass": floored_total, "newton_iters": iters,
            "int_abs_dprime": int_abs, "shift_margin": margin, "step": step_no,
        })
        while snaps and abs(snaps[0] - shift.t) <= 1e-9 * max(1.0, settings.t_end):
            res.snapshots[snaps.pop(0)] = _snapshot(pert, field_.u)

    record(0, 0, B)
    n = 0
    t_end = settings.t_end
    while field_.t < t_end * (1 - 1e-14):
        dt = choose_dt(field_.u, model, grid, cfg)
        target = min([t_end] + [ts for ts in snaps if ts > field_.t + 1e-12])
        if field_.t + dt >= target - 1e-12:
            dt = target - field_.t
        new_field, rep = step(field_, model, profile, shift, cfg, grid, dt)
        dt = rep.dt
        floored_total += rep.floored_mass
        pred = ShiftState(new_field.t, shift.d + dt * shift.d_prime, shift.d_prime, d0)
        B = boundary_mismatch(new_field.u, grid.dx, profile, pred, model.m)
        dp = d_prime_solve(profile, pred, B)
        new_shift = advance_shift(shift, dp, dt)
        # corrector: re-evaluate with the trapezoid shift
        B = boundary_mismatch(new_field.u, grid.dx, profile, new_shift, model.m)
        dp = d_prime_solve(profile, new_shift, B)
        int_abs += 0.5 * dt * (abs(shift.d_prime) + abs(dp))
        margin_new = -s * new_field.t / 2 - (shift.d + 0.5 * dt * (shift.d_prime + dp)) + d0
        res.max_shift_margin = max(res.max_shift_margin, margin_new)
        if margin_new > 0:
            res.shift_violations += 1
        shift = advance_shift(shift, dp, dt, s)
        check_shift(shift, profile)
        field_ = new_field
        n += 1
        res.max_u = max(res.max_u, float(field_.u.max()))
        res.min_u = min(res.min_u, float(field_.u.min()))
        at_snap = snaps and abs(snaps[0] - field_.t) <= 1e-9 * max(1.0, t_end)
        done = field_.t >= t_end * (1 - 1e-14)
        if n % settings.record_every == 0 or at_snap or done:
            record(n, rep.newton_iters, B)
    res.final = field_
    res.n_steps = n
    res.floored_mass = floored_total
    return res


# refinement ------------------------------------------------------------------------

@dataclass(frozen=True)
class RefinementResult:
    nx: tuple
    errors: tuple
    orders: tuple
    monotone: bool

    @property
    def p(self) -> float:
        return self.orders[-1]


def grid_refinement_study(settings: RunSettings, model: FluxModel, levels: int = 3,
                          profile: ProfileTable | None = None) -> RefinementResult:
    """Zero-perturbation runs at ``nx, 2nx, 4nx, ...`` with ``dt_max`` scaled by ``dx``."""
    if levels < 3:
        raise ValueError("levels must be >= 3")
    if profile is None:
        profile = build_profile(model, resolution=settings.profile_resolution)
    nxs, errs = [], []
    for lev in range(levels):
        fac = 2**lev
        solver = SolverConfig(**{**settings.solver.__dict__, "dt_max": settings.solver.dt_max / fac})
        st = RunSettings(L=settings.L, nx=settings.nx * fac, t_end=settings.t_end, center=settings.center,
                         bump=Bump(0.0, settings.bump.center, settings.bump.width), solver=solver,
                         record_every=10**9, beta=settings.beta, seed=settings.seed,
                         profile_resolution=settings.profile_resolution)
        r = run(st, model, profile)
        nxs.append(st.nx)
        errs.append(r.timeseries[-1]["sup_err"])
    orders = tuple(math.log2(errs[i] / errs[i + 1]) if errs[i + 1] > 0 else math.inf
                   for i in range(levels - 1))
    monotone = all(errs[i + 1] < errs[i] for i in range(levels - 1))
    return RefinementResult(tuple(nxs), tuple(errs), orders, monotone)
