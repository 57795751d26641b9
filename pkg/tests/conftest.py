"""Shared fixtures: forward solutions and the reconstruction operator are
expensive, so they are computed once per session and reused everywhere."""

from __future__ import annotations

import numpy as np
import pytest

from coagfrag import forward, picard
from coagfrag.basis import build_basis
from coagfrag.grids import TimeGrid


@pytest.fixture(scope="session")
def default_tgrid() -> TimeGrid:
    return TimeGrid(T=0.5, nt=301)


@pytest.fixture(scope="session")
def default_basis(default_tgrid):
    return build_basis(20, 0.5, default_tgrid)


@pytest.fixture(scope="session")
def forward_runs():
    """(config, solution, clean boundary data) for the four shipped tests."""
    runs = {}
    for test_id in (1, 2, 3, 4):
        cfg = forward.ForwardConfig(profile=forward.initial_profile(test_id))
        sol = forward.solve_forward(cfg)
        runs[test_id] = (cfg, sol, forward.extract_boundary_data(sol, 2.0))
    return runs


@pytest.fixture(scope="session")
def recon_operator(default_tgrid):
    return picard.ReconstructionOperator(picard.InverseConfig(), default_tgrid)


@pytest.fixture(scope="session")
def reconstruction_batch(forward_runs, recon_operator):
    """Reconstructions for every (test, noise, seed) the acceptance gate needs.

    Keys: (test_id, noise) -> list of (seed, history, result, report).
    noise 0.0 runs once; noisy levels run five seeds.
    """
    batch = {}
    for test_id in (1, 2, 3, 4):
        _, sol, bd_clean = forward_runs[test_id]
        profile = forward.initial_profile(test_id)
        for noise in (0.0, 0.05, 0.10):
            seeds = [0] if noise == 0.0 else [1, 2, 3, 4, 5]
            entries = []
            for seed in seeds:
                bd = forward.add_noise(bd_clean, noise, seed) if noise else bd_clean
                history, result = recon_operator.run(bd)
                report = picard.metrics(result, profile)
                entries.append((seed, history, result, report))
            batch[(test_id, noise)] = entries
    return batch


def median_errors(batch, test_id, noise):
    entries = batch[(test_id, noise)]
    l2 = float(np.median([r["rel_l2"] for (_, _, _, r) in entries]))
    linf = float(np.median([r["rel_linf"] for (_, _, _, r) in entries]))
    return l2, linf
