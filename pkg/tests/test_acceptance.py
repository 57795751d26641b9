"""Acceptance gate: every criterion at its stated tolerance.

Run with ``pytest -v tests/test_acceptance.py`` for one pass/fail line per
criterion (criterion 7 reports one line per shipped test profile).
"""

import time

import numpy as np
import pytest

from coagfrag import basis, carleman, cli, collision, forward, kernels, picard
from coagfrag.grids import SizeGrid, TimeGrid, trapezoid_weights
from conftest import median_errors
from test_collision import oracle_coag, oracle_frag


def _report(line: str) -> None:
    print(f"\n[acceptance] {line}")


def test_criterion_01_basis_orthonormality():
    start = time.perf_counter()
    grid = TimeGrid(T=0.5, nt=301)
    bs = basis.build_basis(20, 0.5, grid)
    err = float(np.abs(bs.gram - np.eye(21)).max())
    elapsed = time.perf_counter() - start
    _report(f"criterion 1: gram deviation {err:.2e} (<= 1e-10), {elapsed:.2f} s")
    assert err <= 1e-10
    assert elapsed < 1.0


def test_criterion_02_stiffness_spot_values():
    grid = TimeGrid(T=0.5, nt=301)
    bs = basis.build_basis(20, 0.5, grid)
    e00 = abs(bs.stiffness[0, 0] - 1.0)
    e01 = abs(bs.stiffness[0, 1] - 4.0 * np.sqrt(3.0))
    _report(f"criterion 2: |s00-1|={e00:.2e} (<=1e-12), |s01-4sqrt3|={e01:.2e} (<=1e-10)")
    assert e00 <= 1e-12
    assert e01 <= 1e-10


def test_criterion_03_collision_oracle_equivalence():
    start = time.perf_counter()
    grid = SizeGrid(v_max=5.0, nv=25)
    tgrid = TimeGrid(T=0.5, nt=31)
    K = kernels.sum_kernel()
    rng = np.random.default_rng(23)
    F = rng.uniform(0.0, 1.0, size=(25, 31))
    field = collision.StateField(grid, tgrid, F)
    coag = collision.q_coag(field, K).values
    frag = collision.q_frag(field, K).values
    err = 0.0
    for n in range(31):
        err = max(err, np.abs(coag[:, n] - oracle_coag(grid.nodes, F[:, n], lambda a, b: a + b)).max())
        err = max(err, np.abs(frag[:, n] - oracle_frag(grid.nodes, F[:, n], lambda a, b: a + b)).max())
    G = rng.uniform(0.0, 1.0, size=(25, 31))
    qf = lambda X: collision.q_frag(collision.StateField(grid, tgrid, X), K).values
    add_err = np.abs(qf(1.5 * F + 0.5 * G) - (1.5 * qf(F) + 0.5 * qf(G))).max()
    elapsed = time.perf_counter() - start
    _report(f"criterion 3: oracle deviation {err:.2e}, additivity {add_err:.2e} (<=1e-12), {elapsed:.2f} s")
    assert err <= 1e-12
    assert add_err <= 1e-12
    assert elapsed < 5.0


def test_criterion_04_coagulation_mass_diagnostic():
    grid = SizeGrid(v_max=10.0, nv=241)
    v = grid.nodes
    F = np.where((v >= 0) & (v <= 1), 0.5 * np.pi * np.sin(np.pi * np.clip(v, 0, 1)), 0.0)
    ev = collision.CollisionEvaluator(grid, kernels.sum_kernel(), kernels.sum_kernel())
    Q = ev.coag(F)
    tw = trapezoid_weights(grid.nv, grid.dv)
    m1 = abs(float((v * Q) @ tw))
    scale = float(np.abs(Q) @ tw)
    _report(f"criterion 4: |first moment| {m1:.2e} vs 1e-3 * scale {1e-3 * scale:.2e}")
    assert m1 <= 1e-3 * scale


def test_criterion_05_forward_self_convergence():
    zero = kernels.zero_kernel()
    prof = forward.initial_profile("test1")
    run = lambda nv, nt: forward.solve_forward(
        forward.ForwardConfig(Nv=nv, Nt=nt, K=zero, V=zero, profile=prof)
    ).field.values[:, -1]
    base = run(241, 301)
    half = run(481, 601)
    ref = run(961, 1201)
    linf = float(np.abs(base - ref[::4]).max() / np.abs(ref).max())
    l2_base = float(np.linalg.norm(base - ref[::4]))
    l2_half = float(np.linalg.norm(half[::2] - ref[::4]))
    factor = l2_base / l2_half
    _report(f"criterion 5: terminal Linf diff {linf:.4f} (<=0.05), halving factor {factor:.2f} (>=1.5)")
    assert linf <= 0.05
    assert factor >= 1.5


def test_criterion_06_truncation_fidelity(forward_runs):
    _, _, bd = forward_runs[1]
    n_values, phi = picard.phi_of_N(bd, range(15, 46))
    phi20 = float(phi[list(n_values).index(20)])
    max_increase = float(np.diff(phi).max())
    _report(f"criterion 6: phi(20)={phi20:.5f} (<=0.02), max sweep increase {max_increase:.2e} (<=1e-4)")
    assert phi20 <= 0.02
    assert (np.diff(phi) <= 1e-4).all()


# Acceptance bands: (rel L2, rel Linf) ceilings per shipped test profile.
_BANDS = {1: (0.15, 0.20), 2: (0.10, 0.15), 3: (0.45, 0.60), 4: (0.15, 0.20)}


@pytest.mark.parametrize("test_id", [1, 2, 3, 4])
def test_criterion_07_reconstruction_accuracy(reconstruction_batch, test_id):
    band_l2, band_linf = _BANDS[test_id]
    lines = []
    ok = True
    for noise in (0.05, 0.10):
        l2, linf = median_errors(reconstruction_batch, test_id, noise)
        lines.append(f"noise {noise:.2f}: median rel_l2={l2:.4f} rel_linf={linf:.4f}")
        ok = ok and l2 <= band_l2 and linf <= band_linf
    _report(
        f"criterion 7 test {test_id}: bands (l2<={band_l2}, linf<={band_linf}); "
        + "; ".join(lines)
    )
    for noise in (0.05, 0.10):
        l2, linf = median_errors(reconstruction_batch, test_id, noise)
        assert l2 <= band_l2, f"test {test_id} noise {noise}: median rel_l2 {l2:.4f} > {band_l2}"
        assert linf <= band_linf, f"test {test_id} noise {noise}: median rel_linf {linf:.4f} > {band_linf}"


def test_criterion_08_noise_robustness(reconstruction_batch):
    deltas = {}
    for test_id in (1, 2, 3, 4):
        l2_05, _ = median_errors(reconstruction_batch, test_id, 0.05)
        l2_10, _ = median_errors(reconstruction_batch, test_id, 0.10)
        deltas[test_id] = l2_10 - l2_05
    _report(
        "criterion 8: rel_l2 increase from 5% to 10% noise per test "
        + ", ".join(f"test{t}: {d:+.4f}" for t, d in deltas.items())
        + " (each <= 0.05)"
    )
    assert all(d <= 0.05 for d in deltas.values())


def test_criterion_09_geometric_decay(reconstruction_batch):
    worst = 0.0
    for (test_id, noise), entries in reconstruction_batch.items():
        for seed, hist, _, _ in entries:
            ratios = hist.ratios[1:]
            worst = max(worst, float(ratios.max()))
            assert (ratios < 1.0).all(), (test_id, noise, seed)
    _report(f"criterion 9: all consecutive-error ratios < 1 for k >= 2; empirical rho max {worst:.3f}")


def test_criterion_10_carleman_ratio_probe():
    suite = carleman.random_trace_free_functions(2.0, 20, seed=0)
    minima = {}
    for lam in (2.0, 4.0, 8.0):
        params = carleman.CarlemanParams(lam=lam)
        minima[lam] = min(
            carleman.carleman_ratio_probe(params, u, du, d2u, 2.0) for u, du, d2u in suite
        )
    _report(
        "criterion 10: probe minima "
        + ", ".join(f"lam={k:g}: {v:.3f}" for k, v in minima.items())
        + " (all > 0)"
    )
    assert all(v > 0.0 for v in minima.values())


def test_criterion_11_zero_fixed_point(default_tgrid, recon_operator, tmp_path):
    z = np.zeros(default_tgrid.nt)
    bd = forward.BoundaryData(tgrid=default_tgrid, phi0=z, phiL=z.copy(),
                              psi0=z.copy(), psiL=z.copy())
    hist, res = recon_operator.run(bd)
    assert all(np.abs(it.modes).max() == 0.0 for it in hist.iterates)
    from coagfrag import artifacts

    path = tmp_path / "zero.csv"
    artifacts.write_boundary_csv(path, bd)
    code = cli.main(["reconstruct", "--data", str(path), "--out", str(tmp_path / "out"),
                     "--no-figures", "--set", "kmax=2"])
    _report(f"criterion 11: zero data -> identically zero iterates, exit code {code}")
    assert code == 0


def test_criterion_12_determinism(tmp_path):
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        code = cli.main(["run-test", "--test", "1", "--noise", "0.05", "--seed", "7",
                         "--out", str(out), "--no-figures", "--set", "kmax=3"])
        assert code == 0
        outs.append(out)
    identical = []
    for name in ("boundary.csv", "reconstruction.csv", "convergence.csv",
                 "field.csv", "metrics.json"):
        identical.append((outs[0] / name).read_bytes() == (outs[1] / name).read_bytes())
    _report(f"criterion 12: byte-identical artifacts across repeated runs: {all(identical)}")
    assert all(identical)
