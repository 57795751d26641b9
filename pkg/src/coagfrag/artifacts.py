"""CSV/JSON artifact emission with atomic writes.

Every file is written to a temporary sibling and renamed into place, so
an interrupted run never leaves a truncated artifact.  Floats use %.17g
('.' decimal, no locale), which round-trips IEEE doubles exactly and
keeps repeated runs byte-identical.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .forward import BoundaryData
from .grids import TimeGrid

__all__ = [
    "atomic_write_text",
    "write_table",
    "write_boundary_csv",
    "read_boundary_csv",
    "write_metrics",
]


def _fmt(x) -> str:
    return "%.17g" % float(x)


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    """CSV with one header line; columns must share one length."""
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("columns have unequal lengths")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in columns))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_boundary_csv(path: Path, bd: BoundaryData) -> None:
    write_table(
        path,
        ["t", "phi0", "phiL", "psi0", "psiL"],
        [bd.tgrid.nodes, bd.phi0, bd.phiL, bd.psi0, bd.psiL],
    )


def read_boundary_csv(path: Path) -> BoundaryData:
    """Read a boundary-data CSV back onto its (uniform) time grid."""
    raw = np.genfromtxt(path, delimiter=",", names=True)
    names = raw.dtype.names
    expected = ("t", "phi0", "phiL", "psi0", "psiL")
    if names != expected:
        raise ValueError(f"boundary CSV must have columns {expected}, got {names}")
    t = np.atleast_1d(raw["t"])
    if t.size < 2:
        raise ValueError("boundary CSV needs at least two rows")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-8, atol=1e-12) or abs(t[0]) > 1e-12:
        raise ValueError("boundary CSV time column is not a uniform grid from 0")
    tgrid = TimeGrid(T=float(t[-1]), nt=t.size)
    return BoundaryData(
        tgrid=tgrid,
        phi0=np.atleast_1d(raw["phi0"]),
        phiL=np.atleast_1d(raw["phiL"]),
        psi0=np.atleast_1d(raw["psi0"]),
        psiL=np.atleast_1d(raw["psiL"]),
    )


def write_metrics(path: Path, entries: dict) -> None:
    """Flat key-value metrics file (JSON; NaN mapped to null)."""
    clean = {}
    for k, v in entries.items():
        if isinstance(v, float) and math.isnan(v):
            clean[k] = None
        elif isinstance(v, (np.floating, np.integer)):
            clean[k] = v.item()
        else:
            clean[k] = v
    atomic_write_text(path, json.dumps(clean, indent=2, sort_keys=True) + "\n")
