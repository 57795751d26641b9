"""Exception types shared across the package."""

__all__ = [
    "CoagfragError",
    "ConfigError",
    "InvalidKernelError",
    "NumericalFailureError",
    "RankDeficiencyError",
]


class CoagfragError(Exception):
    """Base class for package errors."""


class ConfigError(CoagfragError, ValueError):
    """Invalid configuration: bad key, bad value, inconsistent grids."""


class InvalidKernelError(CoagfragError, ValueError):
    """A rate kernel violated a requirement (e.g. negativity)."""


class NumericalFailureError(CoagfragError, RuntimeError):
    """A linear solve or time step failed numerically.

    ``step`` carries the failing time-step index when raised by the
    forward solver, otherwise ``None``.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class RankDeficiencyError(NumericalFailureError):
    """Unregularized normal equations were singular to working precision."""
