"""Forward solver, boundary extraction, and the noise model."""

import numpy as np
import pytest

from coagfrag import artifacts, forward, kernels
from coagfrag.collision import StateField
from coagfrag.grids import SizeGrid, TimeGrid


class TestInitialProfiles:
    def test_test1_peak(self):
        prof = forward.initial_profile("test1")
        assert prof(0.5) == pytest.approx(np.pi / 2.0, rel=1e-12)
        assert prof(1.5) == 0.0

    def test_test3_support(self):
        prof = forward.initial_profile(3)
        assert prof(0.3) == 0.0
        assert prof(0.8) == 2.5

    def test_test4_is_probability_density(self):
        prof = forward.initial_profile("test4")
        v = np.linspace(0.0, 2.0, 200001)
        assert np.trapezoid(prof(v), v) == pytest.approx(1.0, abs=1e-6)
        # B(3,7) = 2! 6! / 9! = 1/252
        assert forward._BETA_37 == pytest.approx(1.0 / 252.0, rel=1e-15)

    def test_nonnegative(self):
        v = np.linspace(0.0, 10.0, 1001)
        for t in (1, 2, 3, 4):
            assert forward.initial_profile(t)(v).min() >= 0.0

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            forward.initial_profile("test9")
        with pytest.raises(ValueError):
            forward.initial_profile("custom")

    def test_custom_selector(self):
        prof = forward.initial_profile("custom", custom=lambda v: v * 0.0)
        assert prof(1.0) == 0.0


class TestSolveForward:
    def test_zero_initial_density(self):
        cfg = forward.ForwardConfig(
            Nv=41, Nt=31, profile=forward.initial_profile("custom", custom=lambda v: v * 0.0)
        )
        sol = forward.solve_forward(cfg)
        assert np.abs(sol.field.values).max() == 0.0

    def test_boundary_rows_exact(self, forward_runs):
        for test_id in (1, 2, 3, 4):
            _, sol, _ = forward_runs[test_id]
            assert np.abs(sol.field.values[0]).max() <= 1e-10
            assert np.abs(sol.field.values[-1]).max() <= 1e-10

    def test_bounded_and_nearly_positive(self, forward_runs):
        _, sol, _ = forward_runs[2]
        F = sol.field.values
        tw = np.full(241, sol.field.grid.dv)
        tw[0] = tw[-1] = 0.5 * sol.field.grid.dv
        assert (F[:, -1] @ tw) < 10.0
        assert F.min() >= -1e-6

    def test_self_convergence_pure_transport_diffusion(self):
        zero = kernels.zero_kernel()
        prof = forward.initial_profile("test1")
        base = forward.solve_forward(forward.ForwardConfig(Nv=121, Nt=151, K=zero, V=zero, profile=prof))
        ref = forward.solve_forward(forward.ForwardConfig(Nv=481, Nt=601, K=zero, V=zero, profile=prof))
        diff = np.abs(base.field.values[:, -1] - ref.field.values[::4, -1]).max()
        assert diff / np.abs(ref.field.values[:, -1]).max() <= 0.05


class TestExtractBoundaryData:
    def test_zero_solution(self):
        grid = SizeGrid(v_max=10.0, nv=241)
        tgrid = TimeGrid(T=0.5, nt=31)
        sol = forward.ForwardSolution(field=StateField(grid, tgrid, np.zeros((241, 31))))
        bd = forward.extract_boundary_data(sol, 2.0)
        for series in (bd.phi0, bd.phiL, bd.psi0, bd.psiL):
            assert np.abs(series).max() == 0.0

    def test_linear_field_derivative_exact(self):
        # f(v, t) = v e^{-t}: the one-sided second-order stencil is exact on
        # linear-in-v fields, so psi0 = e^{-t} to roundoff.
        grid = SizeGrid(v_max=10.0, nv=241)
        tgrid = TimeGrid(T=0.5, nt=31)
        F = grid.nodes[:, None] * np.exp(-tgrid.nodes)[None, :]
        sol = forward.ForwardSolution(field=StateField(grid, tgrid, F))
        bd = forward.extract_boundary_data(sol, 2.0)
        assert np.abs(bd.psi0 - np.exp(-tgrid.nodes)).max() <= 1e-12
        assert np.abs(bd.psiL - np.exp(-tgrid.nodes)).max() <= 1e-12
        assert np.abs(bd.phiL - 2.0 * np.exp(-tgrid.nodes)).max() <= 1e-12

    def test_phiL_positive_after_start(self, forward_runs):
        _, _, bd = forward_runs[1]
        assert (bd.phiL[1:] > 0).all()
        assert np.abs(bd.phi0).max() == 0.0

    def test_off_grid_endpoint_rejected(self, forward_runs):
        _, sol, _ = forward_runs[1]
        with pytest.raises(ValueError):
            forward.extract_boundary_data(sol, 2.01)


class TestAddNoise:
    def test_zero_level_is_identity(self, forward_runs):
        _, _, bd = forward_runs[1]
        noisy = forward.add_noise(bd, 0.0, seed=3)
        assert np.array_equal(noisy.phiL, bd.phiL)
        assert np.array_equal(noisy.psi0, bd.psi0)

    def test_reproducible(self, forward_runs):
        _, _, bd = forward_runs[1]
        a = forward.add_noise(bd, 0.05, seed=42)
        b = forward.add_noise(bd, 0.05, seed=42)
        for name in ("phi0", "phiL", "psi0", "psiL"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_streams_differ(self, forward_runs):
        _, _, bd = forward_runs[1]
        a = forward.add_noise(bd, 0.05, seed=1)
        b = forward.add_noise(bd, 0.05, seed=2)
        assert not np.array_equal(a.phiL, b.phiL)

    def test_relative_bound(self, forward_runs):
        _, _, bd = forward_runs[1]
        noisy = forward.add_noise(bd, 0.05, seed=5)
        mask = np.abs(bd.phiL) > 0
        rel = np.abs(noisy.phiL[mask] / bd.phiL[mask] - 1.0)
        assert rel.max() <= 0.05 + 1e-12

    def test_phi0_untouched_and_negative_level_rejected(self, forward_runs):
        _, _, bd = forward_runs[1]
        noisy = forward.add_noise(bd, 0.1, seed=0)
        assert np.abs(noisy.phi0).max() == 0.0
        with pytest.raises(ValueError):
            forward.add_noise(bd, -0.1, seed=0)


class TestBoundaryCsv:
    def test_round_trip(self, forward_runs, tmp_path):
        _, _, bd = forward_runs[1]
        noisy = forward.add_noise(bd, 0.05, seed=9)
        path = tmp_path / "boundary.csv"
        artifacts.write_boundary_csv(path, noisy)
        back = artifacts.read_boundary_csv(path)
        assert back.tgrid.nt == noisy.tgrid.nt
        assert back.tgrid.T == pytest.approx(noisy.tgrid.T, abs=1e-15)
        for name in ("phi0", "phiL", "psi0", "psiL"):
            assert np.array_equal(getattr(back, name), getattr(noisy, name))

    def test_header_validation(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            artifacts.read_boundary_csv(path)
