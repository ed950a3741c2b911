"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid or incomplete configuration, detected before any computation."""


class ProfileError(RuntimeError):
    """The traveling-wave integration could not reach a tail switchover."""


class ShiftInvariantError(RuntimeError):
    """The shift d(t) left the region where the boundary balance is valid."""


class NewtonError(RuntimeError):
    """The implicit diffusion solve did not converge."""
