"""Legendre-exponential time basis: construction, projection, synthesis.

The basis functions are psi_n(t) = e^t * q_n(t), where q_n is the Legendre
polynomial rescaled to [0, T] and normalized in L^2(0, T).  The family is
orthonormal for the weighted inner product <u, v> = int_0^T e^{-2t} u v dt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import TimeGrid, trapezoid_weights

__all__ = [
    "legendre_eval",
    "legendre_deriv",
    "psi_values",
    "dpsi_values",
    "BasisSet",
    "build_basis",
    "project",
    "synthesize",
    "coefficient_decay_check",
]

_X_TOL = 1e-12


def legendre_eval(n: int, x) -> np.ndarray | float:
    """Legendre polynomial P_n(x) on [-1, 1] via the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _X_TOL):
        raise ValueError("evaluation point outside [-1, 1]")
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p if p.ndim else float(p)


def legendre_deriv(n: int, x) -> np.ndarray | float:
    """Derivative P_n'(x) via P'_{k+1} = P'_{k-1} + (2k+1) P_k."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _X_TOL):
        raise ValueError("evaluation point outside [-1, 1]")
    dp_prev = np.zeros_like(x)          # P_0'
    if n == 0:
        return dp_prev if dp_prev.ndim else float(dp_prev)
    dp = np.ones_like(x)                # P_1'
    p_prev = np.ones_like(x)            # P_0
    p = x.copy()                        # P_1
    for k in range(1, n):
        dp, dp_prev = dp_prev + (2 * k + 1) * p, dp
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return dp if dp.ndim else float(dp)


def _q_tables(n_max: int, T: float, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the rescaled polynomials q_n on [0, T]."""
    t = np.asarray(t, dtype=float)
    x = 2.0 * t / T - 1.0
    x = np.clip(x, -1.0, 1.0)
    q = np.empty((n_max + 1, t.size))
    dq = np.empty((n_max + 1, t.size))
    for n in range(n_max + 1):
        scale = np.sqrt((2 * n + 1) / T)
        q[n] = scale * legendre_eval(n, x)
        dq[n] = scale * legendre_deriv(n, x) * (2.0 / T)
    return q, dq


def psi_values(n_max: int, T: float, t) -> np.ndarray:
    """Table psi_n(t) of shape (n_max+1, len(t)) for 0 <= t <= T."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < -_X_TOL) or np.any(t > T + _X_TOL):
        raise ValueError("time outside [0, T]")
    q, _ = _q_tables(n_max, T, t)
    return np.exp(t)[None, :] * q


def dpsi_values(n_max: int, T: float, t) -> np.ndarray:
    """Table psi_n'(t) = e^t (q_n + q_n') of shape (n_max+1, len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < -_X_TOL) or np.any(t > T + _X_TOL):
        raise ValueError("time outside [0, T]")
    q, dq = _q_tables(n_max, T, t)
    return np.exp(t)[None, :] * (q + dq)


@dataclass(frozen=True)
class BasisSet:
    """Tabulated truncated basis on a measurement time grid.

    ``stiffness[m, n]`` is int_0^T e^{-2t} psi_n'(t) psi_m(t) dt and
    ``gram`` is the weighted Gram matrix; both are evaluated with a
    Gauss-Legendre rule that is exact for the polynomial integrands.
    ``data_gram`` is the same Gram matrix under the trapezoid rule of the
    measurement grid; projections solve against it so that sampled basis
    functions are recovered exactly (see :func:`project`).
    """

    N: int
    T: float
    tgrid: TimeGrid
    psi_table: np.ndarray = field(repr=False)
    dpsi_table: np.ndarray = field(repr=False)
    gauss_nodes: np.ndarray = field(repr=False)
    gauss_weights: np.ndarray = field(repr=False)
    stiffness: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)
    data_gram: np.ndarray = field(repr=False)

    def projection_weights(self) -> np.ndarray:
        """Trapezoid x exponential weights of the measurement grid."""
        return trapezoid_weights(self.tgrid.nt, self.tgrid.dt) * np.exp(
            -2.0 * self.tgrid.nodes
        )


def build_basis(N: int, T: float, grid: TimeGrid) -> BasisSet:
    """Construct the truncated basis with tables on ``grid``.

    The Gauss rule uses N+1 nodes on [0, T]: the Gram and stiffness
    integrands reduce to polynomials of degree <= 2N once the exponential
    weight cancels, so the rule integrates them exactly.
    """
    if N < 0:
        raise ValueError("truncation index must be non-negative")
    if T <= 0:
        raise ValueError("final time must be positive")
    if abs(grid.T - T) > _X_TOL * max(1.0, T):
        raise ValueError("grid final time disagrees with T")

    xg, wg = np.polynomial.legendre.leggauss(N + 1)
    tg = 0.5 * T * (xg + 1.0)
    wgt = 0.5 * T * wg

    qg, dqg = _q_tables(N, T, tg)
    # e^{-2t} psi_m psi_n = q_m q_n ; e^{-2t} psi_n' psi_m = (q_n + q_n') q_m
    gram = (qg * wgt) @ qg.T
    stiffness = (qg * wgt) @ (qg + dqg).T

    psi_table = psi_values(N, T, grid.nodes)
    w_data = trapezoid_weights(grid.nt, grid.dt) * np.exp(-2.0 * grid.nodes)
    data_gram = (psi_table * w_data) @ psi_table.T

    return BasisSet(
        N=N,
        T=T,
        tgrid=grid,
        psi_table=psi_table,
        dpsi_table=dpsi_values(N, T, grid.nodes),
        gauss_nodes=tg,
        gauss_weights=wgt,
        stiffness=stiffness,
        gram=gram,
        data_gram=data_gram,
    )


def project(series: np.ndarray, basis: BasisSet) -> np.ndarray:
    """Estimate the coefficients c_m = int_0^T e^{-2t} u(t) psi_m(t) dt.

    ``series`` holds u sampled on the basis time grid (a matrix of series
    is accepted, one per row).  All inner products use the composite
    trapezoid rule on that grid; solving against the same rule's Gram
    matrix turns the raw quadratures into the weighted discrete
    least-squares fit, so sampled basis functions are recovered exactly.
    Raw trapezoid quadratures lose orthonormality for n near 20 on a
    301-node grid, which breaks the truncation-selection sweep; the Gram
    solve removes that bias at no extra data requirement.
    """
    series = np.asarray(series, dtype=float)
    nt = basis.tgrid.nt
    if series.shape[-1] != nt:
        raise ValueError(f"series length {series.shape[-1]} != grid size {nt}")
    raw = (series * basis.projection_weights()) @ basis.psi_table.T
    return np.linalg.solve(basis.data_gram, raw.T).T if raw.ndim > 1 else \
        np.linalg.solve(basis.data_gram, raw)


def synthesize(coeffs: np.ndarray, basis: BasisSet, t) -> np.ndarray | float:
    """Evaluate sum_n c_n psi_n(t) for t in [0, T] (scalar or array)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.N + 1,):
        raise ValueError("coefficient vector must have length N+1")
    scalar = np.isscalar(t) or np.ndim(t) == 0
    vals = coeffs @ psi_values(basis.N, basis.T, t)
    return float(vals[0]) if scalar else vals


def coefficient_decay_check(series: np.ndarray, basis: BasisSet, ell: int) -> dict:
    """Empirical smoothness probe: the sequence n^ell |c_n| and its maximum.

    For a C^inf sample the weighted sequence stays bounded; the returned
    maximum is the empirical constant.
    """
    c = project(series, basis)
    n = np.arange(basis.N + 1, dtype=float)
    weighted = n**ell * np.abs(c)
    return {
        "coefficients": c,
        "weighted": weighted,
        "max": float(weighted.max()),
        "argmax": int(weighted.argmax()),
    }
