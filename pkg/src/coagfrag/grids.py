"""Uniform time and size grids used by every other module."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeGrid", "SizeGrid"]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_n = n * T / (nt - 1) on [0, T], n = 0..nt-1."""

    T: float
    nt: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("final time T must be positive")
        if self.nt < 2:
            raise ValueError("time grid needs at least 2 nodes")
        object.__setattr__(self, "nodes", np.linspace(0.0, self.T, self.nt))

    @property
    def dt(self) -> float:
        return self.T / (self.nt - 1)


@dataclass(frozen=True)
class SizeGrid:
    """Uniform grid v_i = i * v_max / (nv - 1) on [0, v_max], i = 0..nv-1."""

    v_max: float
    nv: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.nv < 2:
            raise ValueError("size grid needs at least 2 nodes")
        object.__setattr__(self, "nodes", np.linspace(0.0, self.v_max, self.nv))

    @property
    def dv(self) -> float:
        return self.v_max / (self.nv - 1)

    def index_of(self, v: float, tol: float = 1e-9) -> int:
        """Index of the node equal to ``v``; raises if ``v`` is not a node."""
        i = int(round(v / self.dv))
        if i < 0 or i >= self.nv or abs(self.nodes[i] - v) > tol * max(1.0, self.v_max):
            raise ValueError(f"v={v} is not a node of the grid (dv={self.dv})")
        return i


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    """Composite-trapezoid weights on a uniform grid of n nodes, spacing h."""
    if n == 1:
        return np.zeros(1)
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w
