"""Coagulation-fragmentation forward simulation and initial-density
reconstruction from boundary observations."""

from .forward import (
    BoundaryData,
    ForwardConfig,
    add_noise,
    extract_boundary_data,
    initial_profile,
    solve_forward,
)
from .picard import InverseConfig, ReconstructionOperator, metrics, phi_of_N, run

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "ForwardConfig",
    "InverseConfig",
    "ReconstructionOperator",
    "add_noise",
    "extract_boundary_data",
    "initial_profile",
    "metrics",
    "phi_of_N",
    "run",
    "solve_forward",
    "__version__",
]
