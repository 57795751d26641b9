"""Forward solver and synthetic boundary-data generation.

Solves the truncated coagulation-fragmentation equation with a
semi-implicit scheme (implicit upwind transport and central diffusion,
explicit collision term), then restricts the solution to the inverse
domain, differentiates at its endpoints, and corrupts the observations
with multiplicative noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import fd
from .collision import CollisionEvaluator, StateField
from .errors import NumericalFailureError
from .grids import SizeGrid, TimeGrid
from .kernels import DriftCoefficient, Kernel, constant_drift, sum_kernel
from .lsq import NormalEquationsSolver

__all__ = [
    "InitialProfile",
    "ForwardConfig",
    "ForwardSolution",
    "BoundaryData",
    "initial_profile",
    "solve_forward",
    "extract_boundary_data",
    "add_noise",
]

#: Ridge used when reconciling the overdetermined per-step system.
STEP_RIDGE = 1e-12


@dataclass(frozen=True)
class InitialProfile:
    """Closed-form initial density with its selector name."""

    selector: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v):
        return self.fn(np.asarray(v, dtype=float))


def _test1(v):
    return np.where((v >= 0) & (v <= 1), 0.5 * np.pi * np.sin(np.pi * np.clip(v, 0, 1)), 0.0)


def _test2(v):
    sigma, mu = 0.2, 0.7
    return np.exp(-((v - mu) ** 2) / (2 * sigma**2)) / (math.sqrt(2 * math.pi) * sigma)


def _test3(v):
    return np.where((v >= 0.6) & (v <= 1.0), 2.5, 0.0)


# Scaled Beta(3, 7) density on [0, 2]; B(3, 7) = 2! 6! / 9! = 1/252.
_BETA_37 = math.factorial(2) * math.factorial(6) / math.factorial(9)


def _test4(v):
    u = v / 2.0
    core = (u**2) * (1.0 - u) ** 6 / (2.0 * _BETA_37)
    return np.where((v >= 0) & (v <= 2.0), core, 0.0)


_PROFILES: dict[str, Callable] = {
    "test1": _test1,
    "test2": _test2,
    "test3": _test3,
    "test4": _test4,
}


def initial_profile(selector: str | int, custom: Callable | None = None) -> InitialProfile:
    """Shipped initial densities; ``custom`` supplies the map for 'custom'."""
    if isinstance(selector, int):
        selector = f"test{selector}"
    if selector == "custom":
        if custom is None:
            raise ValueError("selector 'custom' requires an evaluatable map")
        return InitialProfile(selector="custom", fn=custom)
    try:
        return InitialProfile(selector=selector, fn=_PROFILES[selector])
    except KeyError:
        raise ValueError(
            f"unknown profile selector '{selector}' (known: {sorted(_PROFILES)} or 'custom')"
        ) from None


@dataclass
class ForwardConfig:
    """Truncated forward problem setup (defaults are the shipped protocol)."""

    R: float = 10.0
    Nv: int = 241
    T: float = 0.5
    Nt: int = 301
    b: DriftCoefficient = field(default_factory=constant_drift)
    K: Kernel = field(default_factory=sum_kernel)
    V: Kernel = field(default_factory=sum_kernel)
    profile: InitialProfile = field(default_factory=lambda: initial_profile("test1"))

    def __post_init__(self):
        if self.R <= 0 or self.Nv < 3 or self.Nt < 3 or self.T <= 0:
            raise ValueError("need R > 0, T > 0, Nv >= 3, Nt >= 3")

    @property
    def grid(self) -> SizeGrid:
        return SizeGrid(v_max=self.R, nv=self.Nv)

    @property
    def tgrid(self) -> TimeGrid:
        return TimeGrid(T=self.T, nt=self.Nt)


@dataclass
class ForwardSolution:
    """Space-time density table on [0, R] x [0, T] with zero boundary rows."""

    field: StateField


@dataclass
class BoundaryData:
    """The four observation time series; phi0 is identically zero.

    The datum phi0 = f(0, t) is pinned by the model's boundary condition
    and is never perturbed by noise.
    """

    tgrid: TimeGrid
    phi0: np.ndarray
    phiL: np.ndarray
    psi0: np.ndarray
    psiL: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        for name in ("phi0", "phiL", "psi0", "psiL"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.tgrid.nt,):
                raise ValueError(f"{name} length does not match the time grid")
            setattr(self, name, arr)


def solve_forward(cfg: ForwardConfig) -> ForwardSolution:
    """Semi-implicit time stepping of the truncated forward equation.

    Each step stacks the Nv finite-difference rows of
    (I/dt + b D1_upwind - D2) f^{n+1} = f^n/dt + Q(f^n) with the boundary
    values f(0) = f(R) = 0 imposed, leaving an overdetermined system for
    the interior unknowns that is solved in the least-squares sense.
    """
    grid, tgrid = cfg.grid, cfg.tgrid
    v, dv, dt = grid.nodes, grid.dv, tgrid.dt

    bvec = np.asarray(cfg.b(v), dtype=float)
    # Upwind first derivative for b > 0: backward differences, forward at i=0.
    d1 = np.zeros((grid.nv, grid.nv))
    for i in range(grid.nv):
        j = max(i - 1, 0)
        d1[i, j], d1[i, j + 1] = -1.0 / dv, 1.0 / dv
    d2 = fd.d2_matrix(v)
    op = np.eye(grid.nv) / dt + bvec[:, None] * d1 - d2

    interior = op[:, 1:-1]
    try:
        solver = NormalEquationsSolver(interior, ridge=STEP_RIDGE)
    except NumericalFailureError as exc:
        raise NumericalFailureError(f"forward operator factorization failed: {exc}", step=0)

    evaluator = CollisionEvaluator(grid, cfg.K, cfg.V)

    values = np.empty((grid.nv, tgrid.nt))
    f = np.asarray(cfg.profile(v), dtype=float).copy()
    f[0] = f[-1] = 0.0
    values[:, 0] = f
    for n in range(1, tgrid.nt):
        rhs = f / dt + evaluator.total(f)
        try:
            x = solver.solve_rhs(rhs)
        except (NumericalFailureError, ValueError) as exc:
            raise NumericalFailureError(f"forward step failed: {exc}", step=n)
        f = np.concatenate(([0.0], x, [0.0]))
        values[:, n] = f
    return ForwardSolution(field=StateField(grid=grid, tgrid=tgrid, values=values))


def extract_boundary_data(sol: ForwardSolution, L: float) -> BoundaryData:
    """Clean observations at v = 0 and v = L from a forward solution.

    ``L`` must be a node of the forward grid (no interpolation);
    derivatives use second-order one-sided stencils, pointing right at 0
    and left at L so only values inside the observation domain enter.
    """
    grid, tgrid = sol.field.grid, sol.field.tgrid
    iL = grid.index_of(L)
    if iL < 2:
        raise ValueError("inverse endpoint too close to the origin for the stencils")
    F = sol.field.values
    dv = grid.dv
    psi0 = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * dv)
    psiL = (3.0 * F[iL] - 4.0 * F[iL - 1] + F[iL - 2]) / (2.0 * dv)
    return BoundaryData(
        tgrid=tgrid,
        phi0=np.zeros(tgrid.nt),
        phiL=F[iL].copy(),
        psi0=psi0,
        psiL=psiL,
        noise_level=0.0,
        seed=None,
    )


def add_noise(bd: BoundaryData, delta: float, seed: int) -> BoundaryData:
    """Multiplicative noise g (1 + delta xi) with xi i.i.d. uniform [-1, 1].

    Three independent streams spawned from one seed perturb phiL, psi0,
    psiL; phi0 stays exact.
    """
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
    nt = bd.tgrid.nt
    xi = [rng.uniform(-1.0, 1.0, size=nt) for rng in streams]
    return BoundaryData(
        tgrid=bd.tgrid,
        phi0=bd.phi0.copy(),
        phiL=bd.phiL * (1.0 + delta * xi[0]),
        psi0=bd.psi0 * (1.0 + delta * xi[1]),
        psiL=bd.psiL * (1.0 + delta * xi[2]),
        noise_level=delta,
        seed=seed,
    )
