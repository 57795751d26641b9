"""Dense regularized linear least squares via pivoted normal equations.

Every Picard step and every forward time step funnels through this
module.  The solver forms (A^T A + ridge I) x = A^T b, factors it with a
Cholesky decomposition, and applies one step of iterative refinement so
the normal-equations residual sits at working precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalFailureError, RankDeficiencyError

__all__ = ["LinearSystem", "LsqSolution", "NormalEquationsSolver", "solve"]


@dataclass
class LinearSystem:
    """Stacked rows A (m x n), right-hand side b (m,), ridge >= 0.

    The ridge acts as sqrt(ridge) * I rows appended to A with zero
    right-hand side, i.e. the solution minimizes |Ax - b|^2 + ridge |x|^2.
    """

    rows: np.ndarray
    rhs: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.rows.ndim != 2 or self.rows.shape[0] < 1 or self.rows.shape[1] < 1:
            raise ValueError("matrix must be two-dimensional and nonempty")
        if self.rhs.shape != (self.rows.shape[0],):
            raise ValueError("right-hand side length does not match row count")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass
class LsqSolution:
    x: np.ndarray
    residual_norm: float


class NormalEquationsSolver:
    """Prefactored normal equations for repeated solves with one matrix.

    The forward stepper and the Picard loop reuse a single factorization
    across hundreds of right-hand sides; ``solve`` below is the one-shot
    convenience wrapper.
    """

    def __init__(self, rows: np.ndarray, ridge: float = 0.0):
        rows = np.asarray(rows, dtype=float)
        if not np.all(np.isfinite(rows)):
            raise ValueError("matrix contains non-finite entries")
        self.rows = rows
        self.ridge = float(ridge)
        gram = rows.T @ rows
        if ridge > 0:
            gram[np.diag_indices_from(gram)] += ridge
        try:
            self._chol = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            if ridge == 0.0:
                rank = int(np.linalg.matrix_rank(rows))
                raise RankDeficiencyError(
                    f"normal equations singular to tolerance: rank {rank} < {rows.shape[1]} "
                    "unknowns with ridge = 0"
                ) from exc
            raise NumericalFailureError("normal equations not positive definite") from exc
        self._gram = gram

    def solve_rhs(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if not np.all(np.isfinite(rhs)):
            raise ValueError("right-hand side contains non-finite entries")
        c = self.rows.T @ rhs
        x = scipy.linalg.cho_solve(self._chol, c, check_finite=False)
        # One refinement pass keeps the normal-equations residual at
        # working precision even for ill-conditioned stacks.
        r = c - self._gram @ x
        x += scipy.linalg.cho_solve(self._chol, r, check_finite=False)
        if not np.all(np.isfinite(x)):
            raise NumericalFailureError("solution contains non-finite entries")
        return x


def solve(sys: LinearSystem) -> LsqSolution:
    """Minimize |Ax - b|^2 + ridge |x|^2 for a dense stacked system."""
    solver = NormalEquationsSolver(sys.rows, sys.ridge)
    x = solver.solve_rhs(sys.rhs)
    residual = sys.rows @ x - sys.rhs
    return LsqSolution(x=x, residual_norm=float(np.linalg.norm(residual)))
