"""Coagulation/fragmentation rate kernels and the size-drift coefficient."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import trapezoid_weights

__all__ = [
    "Kernel",
    "DriftCoefficient",
    "sum_kernel",
    "zero_kernel",
    "product_kernel",
    "constant_drift",
    "kernel_by_label",
    "admissibility_probe",
]


@dataclass(frozen=True)
class Kernel:
    """Symmetric nonnegative rate map (v, v*) -> rate.

    ``rate`` must accept and broadcast numpy arrays.  Kernels are kept as
    evaluatable maps (never tabulated) so grid refinement does not
    re-quantize them.
    """

    rate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str

    def __call__(self, v, w):
        return self.rate(np.asarray(v, dtype=float), np.asarray(w, dtype=float))


@dataclass(frozen=True)
class DriftCoefficient:
    """Bounded size-drift coefficient b(v) with a known sup bound."""

    value: Callable[[np.ndarray], np.ndarray]
    sup_bound: float

    def __call__(self, v):
        return self.value(np.asarray(v, dtype=float))


def sum_kernel() -> Kernel:
    """The additive kernel (v, v*) -> v + v*."""
    return Kernel(rate=lambda v, w: v + w, label="sum")


def zero_kernel() -> Kernel:
    """The identically zero kernel (switches an interaction off)."""
    return Kernel(rate=lambda v, w: np.zeros(np.broadcast(v, w).shape), label="zero")


def product_kernel() -> Kernel:
    """The multiplicative kernel (v, v*) -> v * v*."""
    return Kernel(rate=lambda v, w: v * w, label="product")


def constant_drift(c: float = 1.0) -> DriftCoefficient:
    return DriftCoefficient(value=lambda v: np.full_like(v, c, dtype=float), sup_bound=abs(c))


_REGISTRY: dict[str, Callable[[], Kernel]] = {
    "sum": sum_kernel,
    "zero": zero_kernel,
    "product": product_kernel,
}


def kernel_by_label(label: str) -> Kernel:
    """Look up a shipped kernel; the registry is extensible via ``register``."""
    try:
        return _REGISTRY[label]()
    except KeyError:
        raise ValueError(f"unknown kernel label '{label}' (known: {sorted(_REGISTRY)})") from None


def register(label: str, factory: Callable[[], Kernel]) -> None:
    _REGISTRY[label] = factory


def admissibility_probe(
    kernel: Kernel,
    L: float,
    tail_cutoff: float,
    n_v: int = 101,
    n_star: int = 2001,
) -> dict:
    """Numerically probe the finiteness conditions a kernel must satisfy.

    Evaluates, by the trapezoid rule over v* in (0, cutoff) and a supremum
    over v in (0, L), the four weighted tail integrals

        sup_v int K(v,v*)^2 e^{-2(v*-L)+} dv*,   sup_v int K(v,v*)^2 e^{-2 v*} dv*,
        sup_v int K(v,v*)   e^{-(v*-L)+}  dv*,   sup_v int K(v,v*)   e^{-v*}   dv*,

    i.e. the same kernel under both the coagulation-side and the
    fragmentation-side weights.  The probe is a diagnostic: the pass flag
    reports finiteness plus saturation (the values at cutoff/2 and cutoff
    agree), it never blocks a reconstruction.
    """
    if L <= 0 or tail_cutoff <= L:
        raise ValueError("need L > 0 and tail_cutoff > L")

    def suprema(cutoff: float) -> np.ndarray:
        v = np.linspace(0.0, L, n_v)
        s = np.linspace(0.0, cutoff, n_star)
        w = trapezoid_weights(n_star, s[1] - s[0])
        kv = kernel(v[:, None], s[None, :])
        ramp_l = np.exp(-np.maximum(s - L, 0.0))
        ramp_0 = np.exp(-s)
        vals = [
            (kv**2 * (ramp_l**2 * w)).sum(axis=1).max(),
            (kv**2 * (ramp_0**2 * w)).sum(axis=1).max(),
            (kv * (ramp_l * w)).sum(axis=1).max(),
            (kv * (ramp_0 * w)).sum(axis=1).max(),
        ]
        return np.array(vals)

    half = suprema(0.5 * (L + tail_cutoff))
    full = suprema(tail_cutoff)
    finite = bool(np.all(np.isfinite(full)))
    scale = np.maximum(np.abs(full), 1e-300)
    saturated = bool(np.all(np.abs(full - half) <= 1e-3 * np.maximum(scale, 1.0)))
    return {
        "sq_coag_weight": float(full[0]),
        "sq_frag_weight": float(full[1]),
        "lin_coag_weight": float(full[2]),
        "lin_frag_weight": float(full[3]),
        "passed": finite and saturated,
    }
