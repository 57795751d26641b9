"""Carleman weight, weighted norms, and an empirical estimate probe.

The weight is w(v) = exp(2 lam (v - v0)^(-beta)) with v0 < 0, so it is
large near v = 0 and close to 1 at v = L.  Squared least-squares rows
scaled by lam^2 exp(lam r^(-beta)) reproduce the lam^4 exp(2 lam r^(-beta))
boundary coefficients of the weighted functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grids import SizeGrid, trapezoid_weights

__all__ = [
    "CarlemanParams",
    "WeightTable",
    "weight",
    "build_weight_table",
    "weighted_norm",
    "carleman_ratio_probe",
    "random_trace_free_functions",
]


@dataclass(frozen=True)
class CarlemanParams:
    """Weight strength lam, exponent beta, and negative shift v0."""

    lam: float = 2.0
    beta: float = 10.0
    v0: float = -1.0

    def __post_init__(self):
        if self.lam <= 0 or self.beta <= 0:
            raise ValueError("lam and beta must be positive")
        if self.v0 >= 0:
            raise ValueError("v0 must be negative so r(v) = v - v0 stays positive")


def weight(params: CarlemanParams, v) -> np.ndarray | float:
    """The Carleman weight exp(2 lam (v - v0)^(-beta)) for v >= 0."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("weight is defined for v >= 0")
    r = v - params.v0
    out = np.exp(2.0 * params.lam * r ** (-params.beta))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WeightTable:
    """Weight samples on a reconstruction grid plus boundary penalty factors."""

    grid: SizeGrid
    params: CarlemanParams
    w: np.ndarray = field(init=False, repr=False)
    boundary_penalty_0: float = field(init=False)
    boundary_penalty_L: float = field(init=False)

    def __post_init__(self):
        wv = weight(self.params, self.grid.nodes)
        lam, beta, v0 = self.params.lam, self.params.beta, self.params.v0
        object.__setattr__(self, "w", wv)
        object.__setattr__(
            self, "boundary_penalty_0", lam**4 * np.exp(2 * lam * (0.0 - v0) ** (-beta))
        )
        object.__setattr__(
            self,
            "boundary_penalty_L",
            lam**4 * np.exp(2 * lam * (self.grid.v_max - v0) ** (-beta)),
        )

    def penalty_row_weight_0(self) -> float:
        """Row scale whose square is the boundary penalty at v = 0."""
        lam, beta, v0 = self.params.lam, self.params.beta, self.params.v0
        return lam**2 * np.exp(lam * (0.0 - v0) ** (-beta))

    def penalty_row_weight_L(self) -> float:
        lam, beta, v0 = self.params.lam, self.params.beta, self.params.v0
        return lam**2 * np.exp(lam * (self.grid.v_max - v0) ** (-beta))


def build_weight_table(params: CarlemanParams, grid: SizeGrid) -> WeightTable:
    return WeightTable(grid=grid, params=params)


def weighted_norm(mv, params: CarlemanParams) -> float:
    """Squared weighted norm: int_0^L w |f|^2 dv + w(L) |f(L)|^2.

    ``mv`` is a ModeVector on [0, L]; the integral is the trapezoid rule
    on its grid and |f|^2 sums over modes.
    """
    w = weight(params, mv.grid.nodes)
    tw = trapezoid_weights(mv.grid.nv, mv.grid.dv)
    sq = (mv.modes**2).sum(axis=0)
    return float((w * sq) @ tw + w[-1] * sq[-1])


def carleman_ratio_probe(
    params: CarlemanParams,
    u: Callable,
    du: Callable,
    d2u: Callable,
    L: float,
    n_nodes: int = 8001,
    trace_tol: float = 1e-10,
) -> float:
    """Ratio int w |u''|^2 / int w (lam^3 |u|^2 + lam |u'|^2) on (0, L).

    The test function must satisfy u(0) = u(L) = u'(0) = u'(L) = 0 so the
    boundary terms of the integrated estimate vanish; the estimate then
    bounds this ratio below by a positive constant for large lam.
    """
    traces = [u(0.0), u(L), du(0.0), du(L)]
    if max(abs(float(x)) for x in traces) > trace_tol:
        raise ValueError("test function traces do not vanish at v = 0, L")
    v = np.linspace(0.0, L, n_nodes)
    tw = trapezoid_weights(n_nodes, v[1] - v[0])
    w = weight(params, v)
    uu = np.asarray(u(v), dtype=float)
    dd = np.asarray(du(v), dtype=float)
    cc = np.asarray(d2u(v), dtype=float)
    denom = float((w * (params.lam**3 * uu**2 + params.lam * dd**2)) @ tw)
    if denom <= 0.0:
        raise ValueError("degenerate test function (identically zero)")
    num = float((w * cc**2) @ tw)
    return num / denom


def random_trace_free_functions(L: float, count: int, seed: int) -> list[tuple]:
    """Polynomials u = v^2 (L - v)^2 p(v) with exact derivative callables.

    The quartic prefactor makes u and u' vanish at both endpoints; p is a
    random cubic with coefficients in [-1, 1].
    """
    rng = np.random.default_rng(seed)
    prefactor = np.polynomial.Polynomial([0.0, 0.0, 1.0]) * np.polynomial.Polynomial(
        [L * L, -2.0 * L, 1.0]
    )
    suite = []
    while len(suite) < count:
        coeffs = rng.uniform(-1.0, 1.0, size=4)
        if np.max(np.abs(coeffs)) < 0.1:
            continue
        poly = prefactor * np.polynomial.Polynomial(coeffs)
        suite.append((poly, poly.deriv(1), poly.deriv(2)))
    return suite
