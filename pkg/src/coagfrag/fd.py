"""Finite-difference weights and dense derivative matrices on uniform grids.

Stencil weights come from Fornberg's recursion, so every one-sided or
shifted stencil carries the same formal order as its centered counterpart
given the window size.
"""

from __future__ import annotations

import numpy as np

__all__ = ["fd_weights", "derivative_matrix", "d1_matrix", "d2_matrix", "d3_matrix"]


def fd_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Weights w such that sum_j w[j] f(x[j]) approximates f^(order)(x0).

    Fornberg (1988) recursion; exact for polynomials of degree < len(x).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if n <= order:
        raise ValueError("stencil needs more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def derivative_matrix(nodes: np.ndarray, order: int, window: int) -> np.ndarray:
    """Dense matrix D with (D f)_i ~ f^(order)(nodes[i]).

    Each row uses a ``window``-node stencil, centered where possible and
    shifted inward near the ends (second-order accurate for the window
    sizes used below).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if window > n:
        raise ValueError("stencil window exceeds grid size")
    D = np.zeros((n, n))
    half = window // 2
    for i in range(n):
        start = min(max(i - half, 0), n - window)
        D[i, start:start + window] = fd_weights(nodes[start:start + window], nodes[i], order)
    return D


def d1_matrix(nodes: np.ndarray) -> np.ndarray:
    """Second-order first derivative: 3-node central, one-sided at the ends."""
    return derivative_matrix(nodes, 1, 3)


def d2_matrix(nodes: np.ndarray) -> np.ndarray:
    """Second-order second derivative: 3-node central, 4-node at the ends."""
    D = derivative_matrix(nodes, 2, 3)
    n = nodes.size
    if n >= 4:
        D[0, :] = 0.0
        D[0, :4] = fd_weights(nodes[:4], nodes[0], 2)
        D[-1, :] = 0.0
        D[-1, -4:] = fd_weights(nodes[-4:], nodes[-1], 2)
    return D


def d3_matrix(nodes: np.ndarray) -> np.ndarray:
    """Second-order third derivative: 5-node windows, shifted near the ends."""
    return derivative_matrix(nodes, 3, 5)
