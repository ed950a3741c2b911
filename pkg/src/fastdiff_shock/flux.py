"""Convex flux functions, the shock speed and the admissibility checks.

Fluxes are polynomials ``f(u) = c2 u^2 + c3 u^3 + c4 u^4`` (so ``f(0) = 0`` and
``f'(0) = 0``); Burgers is the special case ``c2 = 1/2``.  The quantities that
vanish at the end states (``g``, ``f(u-) - f(U)``) are evaluated in factored
form so that they keep full relative accuracy next to ``u = 0`` and ``u = u-``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fastdiff_shock.errors import ConfigError

KINDS = ("burgers", "polynomial")
N_SAMPLES = 10_000


def rh_speed(flux_eval, u_minus: float) -> float:
    """Shock speed ``s = f(u-)/u-`` for a flux with ``f(0) = 0``."""
    if not u_minus > 0:
        raise ConfigError(f"u_minus must be positive, got {u_minus!r}")
    value = float(flux_eval(u_minus))
    if not np.isfinite(value):
        raise ConfigError(f"flux evaluation at u_minus={u_minus} is not finite")
    return value / u_minus


def _validate_m(m: float) -> None:
    if not (0.5 < m < 1.0):
        raise ConfigError(
            f"fast-diffusion exponent m={m!r} is outside 1/2<m<1, "
            "where the shock stability result holds"
        )


@dataclass(frozen=True)
class FluxModel:
    kind: str
    u_minus: float
    m: float
    coeffs: tuple[float, float, float] = (0.5, 0.0, 0.0)
    s: float = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown flux kind {self.kind!r}; expected one of {KINDS}")
        coeffs = (0.5, 0.0, 0.0) if self.kind == "burgers" else tuple(float(c) for c in self.coeffs)
        if len(coeffs) > 3:
            raise ConfigError("polynomial flux degree is capped at 4 (coefficients c2, c3, c4)")
        coeffs = tuple(coeffs) + (0.0,) * (3 - len(coeffs))
        if not all(np.isfinite(coeffs)):
            raise ConfigError(f"non-finite flux coefficients {coeffs!r}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "u_minus", float(self.u_minus))
        object.__setattr__(self, "m", float(self.m))
        _validate_m(self.m)
        object.__setattr__(self, "s", rh_speed(self.f, self.u_minus))

    @classmethod
    def burgers(cls, u_minus: float, m: float) -> "FluxModel":
        return cls("burgers", u_minus, m)

    @classmethod
    def polynomial(cls, coeffs, u_minus: float, m: float) -> "FluxModel":
        return cls("polynomial", u_minus, m, tuple(coeffs))

    @property
    def coeff_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.float64)

    # derivatives of f ---------------------------------------------------

    def f(self, u):
        c2, c3, c4 = self.coeffs
        u = np.asarray(u, dtype=float)
        return u * u * (c2 + u * (c3 + u * c4))

    def df(self, u):
        c2, c3, c4 = self.coeffs
        u = np.asarray(u, dtype=float)
        return u * (2 * c2 + u * (3 * c3 + u * 4 * c4))

    def d2f(self, u):
        c2, c3, c4 = self.coeffs
        u = np.asarray(u, dtype=float)
        return 2 * c2 + u * (6 * c3 + u * 12 * c4)

    def d3f(self, u):
        _, c3, c4 = self.coeffs
        u = np.asarray(u, dtype=float)
        return 6 * c3 + 24 * c4 * u

    def d4f(self, u):
        return np.full_like(np.asarray(u, dtype=float), 24 * self.coeffs[2])

    # factored forms -----------------------------------------------------

    def _q(self, u):
        # g(u) = u (u - u-) q(u); q is the divided difference of f(u)/u.
        c2, c3, c4 = self.coeffs
        a = self.u_minus
        return c2 + c3 * (u + a) + c4 * (u * u + u * a + a * a)

    def _p(self, u):
        # f(u-) - f(u) = (u- - u) p(u)
        c2, c3, c4 = self.coeffs
        a = self.u_minus
        u2 = u * u
        a2 = a * a
        return c2 * (u + a) + c3 * (u2 + u * a + a2) + c4 * (u2 * u + u2 * a + u * a2 + a2 * a)

    def g(self, u, deficit=None):
        """``f(u) - s u``; ``deficit = u- - u`` may be supplied for accuracy near ``u-``."""
        u = np.asarray(u, dtype=float)
        if deficit is None:
            deficit = self.u_minus - u
        return -u * np.asarray(deficit, dtype=float) * self._q(u)

    def flux_jump(self, u, deficit=None):
        """``f(u-) - f(u)`` without cancellation."""
        u = np.asarray(u, dtype=float)
        if deficit is None:
            deficit = self.u_minus - u
        return np.asarray(deficit, dtype=float) * self._p(u)

    def taylor_remainder(self, u, h):
        """``f(u+h) - f(u) - f'(u) h``, exact for the quartic flux."""
        return h * h * (self.d2f(u) / 2 + h * (self.d3f(u) / 6 + h * self.d4f(u) / 24))

    @property
    def lambda_minus(self) -> float:
        return self.u_minus ** (1 - self.m) * (float(self.df(self.u_minus)) - self.s)


def g_eval(model: FluxModel, u):
    return model.g(u)


@dataclass(frozen=True)
class Admissibility:
    lax: bool
    entropy: bool
    convex: bool
    s: float
    fprime_0: float
    fprime_uminus: float
    max_g: float
    min_f2: float

    @property
    def ok(self) -> bool:
        return self.lax and self.entropy and self.convex

    @property
    def consistent(self) -> bool:
        # for convex f the two shock conditions coincide
        return not self.convex or self.lax == self.entropy


def check_admissibility(model: FluxModel, s: float | None = None) -> Admissibility:
    """Lax, generalized-shock and convexity checks on a dense sample.

    ``s`` overrides the Rankine-Hugoniot speed, for probing the checks.
    """
    speed = model.s if s is None else float(s)
    a = model.u_minus
    delta = a / 1e4
    u_in = np.linspace(delta, a - delta, N_SAMPLES)
    if s is None:
        g = model.g(u_in)
    else:
        g = model.f(u_in) - speed * u_in
    f2 = model.d2f(np.linspace(0.0, a, N_SAMPLES))
    fp0 = float(model.df(0.0))
    fpa = float(model.df(a))
    return Admissibility(
        lax=bool(fp0 < speed < fpa),
        entropy=bool(g.max() < 0),
        convex=bool(f2.min() > 0),
        s=speed,
        fprime_0=fp0,
        fprime_uminus=fpa,
        max_g=float(g.max()),
        min_f2=float(f2.min()),
    )
