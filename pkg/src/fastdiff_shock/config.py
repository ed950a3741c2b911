"""Flat ``key = value`` configuration files.

Lines look like ``grid.nx = 4000``; ``#`` starts a comment; blank lines are
ignored.  Lists are comma separated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from fastdiff_shock.errors import ConfigError
from fastdiff_shock.flux import FluxModel
from fastdiff_shock.solver import Bump, RunSettings, SolverConfig

REQUIRED = (
    "flux.u_minus", "flux.m",
    "grid.L", "grid.nx",
    "solver.dt_max", "solver.cfl", "solver.floor",
    "run.t_end", "run.snapshot_times",
    "init.center", "init.bump.amplitude", "init.bump.center", "init.bump.width",
)

OPTIONAL = {
    "flux.kind": "burgers",
    "flux.coeffs": "0.5, 0, 0",
    "solver.newton_tol": "1e-10",
    "solver.newton_max_iters": "50",
    "solver.limiter": "mc",
    "solver.diffusion": "trbdf2",
    "run.seed": "0",
    "output.dir": "out",
    "ledger.record_every": "10",
    "ledger.beta": "",
    "ledger.bound_factor": "10",
    "profile.resolution": "200",
    "acceptance.transient_time": "2",
    "acceptance.refinement_t_end": "10",
    "sweep.m": "0.6, 0.7, 0.75, 0.8, 0.9",
    "sweep.center": "20",
    "sweep.workers": "0",
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(raw: dict, key: str) -> float:
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"config key {key} must be a number, got {raw[key]!r}") from None


def _int(raw: dict, key: str) -> int:
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(f"config key {key} must be an integer, got {raw[key]!r}") from None


def _floats(raw: dict, key: str) -> tuple[float, ...]:
    text = raw[key].strip()
    if not text:
        return ()
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"config key {key} must be a comma-separated list of numbers") from None


@dataclass(frozen=True)
class RunConfig:
    model: FluxModel
    settings: RunSettings
    seed: int = 0
    out_dir: str = "out"
    bound_factor: float = 10.0
    transient_time: float = 2.0
    refinement_t_end: float = 10.0
    sweep_m: tuple = (0.6, 0.7, 0.75, 0.8, 0.9)
    sweep_center: tuple = (20.0,)
    sweep_workers: int = 0
    raw: dict = field(default_factory=dict, compare=False)

    def with_model(self, model: FluxModel) -> "RunConfig":
        return replace(self, model=model)

    def with_settings(self, **kw) -> "RunConfig":
        return replace(self, settings=replace(self.settings, **kw))


def build_config(raw: dict[str, str]) -> RunConfig:
    for key in REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing config key: {key}")
    unknown = sorted(set(raw) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise ConfigError(f"unknown config key: {unknown[0]}")
    full = {**OPTIONAL, **raw}
    kind = full["flux.kind"]
    u_minus, m = _float(full, "flux.u_minus"), _float(full, "flux.m")
    if kind == "burgers":
        model = FluxModel.burgers(u_minus, m)
    else:
        model = FluxModel(kind, u_minus, m, _floats(full, "flux.coeffs"))
    solver = SolverConfig(
        dt_max=_float(full, "solver.dt_max"), cfl=_float(full, "solver.cfl"),
        newton_tol=_float(full, "solver.newton_tol"),
        newton_max_iters=_int(full, "solver.newton_max_iters"),
        floor=_float(full, "solver.floor"), limiter=full["solver.limiter"],
        diffusion=full["solver.diffusion"],
    )
    beta = full["ledger.beta"].strip()
    settings = RunSettings(
        L=_float(full, "grid.L"), nx=_int(full, "grid.nx"), t_end=_float(full, "run.t_end"),
        center=_float(full, "init.center"),
        bump=Bump(_float(full, "init.bump.amplitude"), _float(full, "init.bump.center"),
                  _float(full, "init.bump.width")),
        solver=solver, snapshot_times=_floats(full, "run.snapshot_times"),
        record_every=_int(full, "ledger.record_every"),
        beta=float(beta) if beta else None, seed=_int(full, "run.seed"),
        profile_resolution=_int(full, "profile.resolution"),
    )
    if settings.nx < 200:
        raise ConfigError("grid.nx must be >= 200")
    return RunConfig(
        model=model, settings=settings, seed=settings.seed, out_dir=full["output.dir"],
        bound_factor=_float(full, "ledger.bound_factor"),
        transient_time=_float(full, "acceptance.transient_time"),
        refinement_t_end=_float(full, "acceptance.refinement_t_end"),
        sweep_m=_floats(full, "sweep.m"), sweep_center=_floats(full, "sweep.center"),
        sweep_workers=_int(full, "sweep.workers"), raw=dict(raw),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return build_config(parse_text(text, str(path)))


BASELINE_TEXT = """\
# Burgers flux, u- = 2, m = 0.75 baseline
flux.kind = burgers
flux.u_minus = 2.0
flux.m = 0.75

grid.L = 200
grid.nx = 4000

solver.dt_max = 0.01
solver.cfl = 0.4
solver.floor = 1e-12

run.t_end = 40
run.snapshot_times = 0, 20, 40
run.seed = 0

init.center = 20
init.bump.amplitude = 0.05
init.bump.center = 10
init.bump.width = 2

ledger.record_every = 10
"""


def baseline_config() -> RunConfig:
    return build_config(parse_text(BASELINE_TEXT, "<baseline>"))
