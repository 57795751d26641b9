"""Discrete coagulation/fragmentation operators and their time projections.

All size integrals use the composite trapezoid rule on the uniform grid
(direct summation); any contribution needing density values beyond the
truncation endpoint is zero, mirroring the forward solver's truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet, project
from .errors import InvalidKernelError
from .grids import SizeGrid, TimeGrid, trapezoid_weights
from .kernels import Kernel

__all__ = [
    "StateField",
    "ModeVector",
    "CollisionEvaluator",
    "q_coag",
    "q_frag",
    "extend_modes",
    "project_Q",
]


@dataclass
class StateField:
    """Density samples F(v_i, t_n) on a size grid x time grid."""

    grid: SizeGrid
    tgrid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nv, self.tgrid.nt):
            raise ValueError("field shape does not match its grids")


@dataclass
class ModeVector:
    """Spatial coefficient functions f_0..f_N sampled on a size grid.

    ``modes`` has shape (N+1, grid.nv); ``L`` marks the inverse-domain
    endpoint (equal to grid.v_max unless the vector has been extended).
    """

    grid: SizeGrid
    modes: np.ndarray
    L: float

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=float)
        if self.modes.ndim != 2 or self.modes.shape[1] != self.grid.nv:
            raise ValueError("modes must have shape (N+1, grid.nv)")

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    @classmethod
    def zeros(cls, grid: SizeGrid, n_modes: int, L: float | None = None) -> "ModeVector":
        return cls(grid=grid, modes=np.zeros((n_modes, grid.nv)), L=grid.v_max if L is None else L)


class CollisionEvaluator:
    """Precomputed kernel tables for repeated operator application on one grid.

    Kernel values and trapezoid weights are assembled once; ``coag`` and
    ``frag`` then act on density arrays of shape (nv,) or (nv, nt).
    """

    def __init__(self, grid: SizeGrid, K: Kernel, V: Kernel):
        self.grid = grid
        v = grid.nodes
        dv = grid.dv
        nv = grid.nv

        kmat = np.asarray(K(v[:, None], v[None, :]), dtype=float)
        vmat = np.asarray(V(v[:, None], v[None, :]), dtype=float)
        if np.any(kmat < 0):
            raise InvalidKernelError(f"coagulation kernel '{K.label}' takes negative values")
        if np.any(vmat < 0):
            raise InvalidKernelError(f"fragmentation kernel '{V.label}' takes negative values")

        # Full-interval trapezoid weights for the coagulation loss integral.
        self._w_full = trapezoid_weights(nv, dv)
        self._kmat = kmat

        # Gain anti-diagonals: K(v_{i-j}, v_j) times the trapezoid weights of
        # the sub-interval [0, v_i], for j = 0..i.
        self._coag_gain = []
        for i in range(nv):
            kd = kmat[np.arange(i, -1, -1), np.arange(i + 1)]
            self._coag_gain.append(kd * trapezoid_weights(i + 1, dv))

        # Fragmentation loss factor int_0^{v_i} V(v_i - v*, v_i) dv* is
        # density-independent: tabulate it once.
        self._frag_loss = np.empty(nv)
        for i in range(nv):
            row = vmat[np.arange(i, -1, -1), i]
            self._frag_loss[i] = row @ trapezoid_weights(i + 1, dv)

        # Fragmentation gain rows: V(v_i, v_j) weighted on [0, v_max - v_i].
        self._frag_gain = []
        for i in range(nv):
            m = nv - i
            self._frag_gain.append(vmat[i, :m] * trapezoid_weights(m, dv))

    def coag(self, F: np.ndarray) -> np.ndarray:
        """Coagulation gain minus loss for F of shape (nv,) or (nv, nt)."""
        F = np.asarray(F, dtype=float)
        flat = F.ndim == 1
        Fv = F[:, None] if flat else F
        loss = Fv * (self._kmat @ (self._w_full[:, None] * Fv))
        gain = np.empty_like(Fv)
        for i in range(self.grid.nv):
            gain[i] = 0.5 * (self._coag_gain[i][:, None] * Fv[i::-1] * Fv[: i + 1]).sum(axis=0)
        out = gain - loss
        return out[:, 0] if flat else out

    def frag(self, F: np.ndarray) -> np.ndarray:
        """Fragmentation gain minus loss for F of shape (nv,) or (nv, nt)."""
        F = np.asarray(F, dtype=float)
        flat = F.ndim == 1
        Fv = F[:, None] if flat else F
        out = -self._frag_loss[:, None] * Fv
        for i in range(self.grid.nv):
            out[i] += 2.0 * (self._frag_gain[i][:, None] * Fv[i:]).sum(axis=0)
        return out[:, 0] if flat else out

    def total(self, F: np.ndarray) -> np.ndarray:
        return self.coag(F) + self.frag(F)


def q_coag(field: StateField, K: Kernel) -> StateField:
    """Coagulation operator applied to a space-time field."""
    ev = CollisionEvaluator(field.grid, K, K)
    return StateField(field.grid, field.tgrid, ev.coag(field.values))


def q_frag(field: StateField, V: Kernel) -> StateField:
    """Fragmentation operator applied to a space-time field."""
    ev = CollisionEvaluator(field.grid, V, V)
    return StateField(field.grid, field.tgrid, ev.frag(field.values))


def extend_modes(mv: ModeVector, ext_grid: SizeGrid) -> ModeVector:
    """Continue each mode beyond L by the exponential tail f_n(L) e^{-(v-L)}.

    ``ext_grid`` must share the spacing of ``mv.grid`` and contain the node
    v = L; values on [0, L] are copied, so the extension is continuous at L.
    """
    if abs(ext_grid.dv - mv.grid.dv) > 1e-12 * mv.grid.dv:
        raise ValueError("extension grid spacing differs from the mode grid")
    iL = ext_grid.index_of(mv.L)
    if iL != mv.grid.nv - 1:
        raise ValueError("extension grid does not start with the mode grid")
    out = np.empty((mv.n_modes, ext_grid.nv))
    out[:, : iL + 1] = mv.modes
    tail = np.exp(-(ext_grid.nodes[iL + 1 :] - mv.L))
    out[:, iL + 1 :] = mv.modes[:, -1][:, None] * tail[None, :]
    return ModeVector(grid=ext_grid, modes=out, L=mv.L)


def extension_grid(grid: SizeGrid, ext: float) -> SizeGrid:
    """Grid continuing ``grid`` past its endpoint by about ``ext`` size units."""
    if ext <= 0:
        raise ValueError("extension length must be positive")
    n_add = max(1, int(round(ext / grid.dv)))
    return SizeGrid(v_max=grid.v_max + n_add * grid.dv, nv=grid.nv + n_add)


def project_Q(
    mv: ModeVector,
    basis: BasisSet,
    K: Kernel,
    V: Kernel,
    ext: float,
    evaluator: CollisionEvaluator | None = None,
) -> np.ndarray:
    """Time-projected collision operator Q_m acting on a mode vector.

    Extends the modes exponentially past L, synthesizes the density on the
    extended grid, applies the collision operator with the extended
    endpoint playing the truncation role, projects every size node's time
    series onto the basis, and restricts back to [0, L].  Returns an array
    of shape (N+1, mv.grid.nv).

    ``evaluator`` may carry precomputed kernel tables for the extended
    grid (they are iterate-independent).
    """
    egrid = extension_grid(mv.grid, ext)
    mv_ext = extend_modes(mv, egrid)
    if evaluator is None:
        evaluator = CollisionEvaluator(egrid, K, V)
    elif evaluator.grid.nv != egrid.nv:
        raise ValueError("evaluator grid does not match the extended grid")

    F = mv_ext.modes.T @ basis.psi_table          # (nv_ext, nt)
    Q = evaluator.total(F)
    coeffs = project(Q, basis)                    # (nv_ext, N+1)
    return coeffs.T[:, : mv.grid.nv]
