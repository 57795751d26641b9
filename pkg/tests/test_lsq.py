"""Regularized least squares: examples, optimality, failure modes."""

import numpy as np
import pytest

from coagfrag import lsq
from coagfrag.errors import RankDeficiencyError


class TestSolveExamples:
    def test_identity(self):
        sol = lsq.solve(lsq.LinearSystem(np.eye(3), np.array([1.0, 2.0, 3.0])))
        assert np.allclose(sol.x, [1.0, 2.0, 3.0], atol=1e-14)
        assert sol.residual_norm <= 1e-14

    def test_overdetermined_mean(self):
        # normal equations: 2x = 2
        sol = lsq.solve(lsq.LinearSystem(np.array([[1.0], [1.0]]), np.array([0.0, 2.0])))
        assert sol.x[0] == pytest.approx(1.0, abs=1e-12)
        assert sol.residual_norm == pytest.approx(np.sqrt(2.0), rel=1e-12)

    def test_ridge_selects_symmetric_solution(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        sol = lsq.solve(lsq.LinearSystem(A, np.array([2.0, 2.0]), ridge=1e-8))
        assert np.allclose(sol.x, [1.0, 1.0], atol=1e-6)


class TestValidation:
    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            lsq.solve(lsq.LinearSystem(np.array([[np.nan]]), np.array([1.0])))
        with pytest.raises(ValueError):
            lsq.solve(lsq.LinearSystem(np.eye(2), np.array([np.inf, 0.0])))

    def test_rank_deficiency_named(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])
        with pytest.raises(RankDeficiencyError, match="rank 1 < 2"):
            lsq.solve(lsq.LinearSystem(A, np.zeros(3), ridge=0.0))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            lsq.LinearSystem(np.eye(2), np.zeros(3))
        with pytest.raises(ValueError):
            lsq.LinearSystem(np.eye(2), np.zeros(2), ridge=-1.0)


class TestOptimality:
    @pytest.mark.parametrize("ridge", [0.0, 1e-8, 1e-3])
    def test_normal_equations_residual(self, ridge):
        rng = np.random.default_rng(15)
        A = rng.standard_normal((40, 12))
        b = rng.standard_normal(40)
        sol = lsq.solve(lsq.LinearSystem(A, b, ridge=ridge))
        lhs = (A.T @ A + ridge * np.eye(12)) @ sol.x
        rhs = A.T @ b
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(rhs)

    def test_matches_reference_solver(self):
        rng = np.random.default_rng(16)
        A = rng.standard_normal((30, 10))
        b = rng.standard_normal(30)
        sol = lsq.solve(lsq.LinearSystem(A, b))
        ref, *_ = np.linalg.lstsq(A, b, rcond=None)
        assert np.allclose(sol.x, ref, atol=1e-10)

    def test_determinism(self):
        rng = np.random.default_rng(17)
        A = rng.standard_normal((25, 8))
        b = rng.standard_normal(25)
        x1 = lsq.solve(lsq.LinearSystem(A, b, ridge=1e-10)).x
        x2 = lsq.solve(lsq.LinearSystem(A.copy(), b.copy(), ridge=1e-10)).x
        assert np.array_equal(x1, x2)


def test_prefactored_solver_reuse():
    rng = np.random.default_rng(18)
    A = rng.standard_normal((20, 6))
    solver = lsq.NormalEquationsSolver(A, ridge=1e-12)
    for _ in range(3):
        b = rng.standard_normal(20)
        x = solver.solve_rhs(b)
        assert np.allclose(x, lsq.solve(lsq.LinearSystem(A, b, ridge=1e-12)).x, atol=1e-12)
