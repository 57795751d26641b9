"""Matplotlib figure rendering for the report path.

Each helper draws one figure and writes it next to the CSV it mirrors.
The Agg backend is forced so figures render identically in headless runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_reconstruction",
    "plot_convergence",
    "plot_field",
    "plot_sweep",
    "plot_probe",
]

_DPI = 150


def _save(fig, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_reconstruction(v, f0_rec, f0_true=None, path: Path = "reconstruction.png", title=""):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    if f0_true is not None:
        ax.plot(v, f0_true, "-", color="tab:blue", lw=1.8, label="true")
    ax.plot(v, f0_rec, "--", color="tab:red", lw=1.8, label="reconstructed")
    ax.set_xlabel("v")
    ax.set_ylabel("initial density")
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_convergence(consec_errors, path: Path = "convergence.png", title=""):
    k = np.arange(1, len(consec_errors) + 1)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.semilogy(k, consec_errors, "o-", color="tab:blue")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("consecutive sup-norm error")
    ax.set_xticks(k)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_field(v, t, f_rec, f_true=None, pointwise_err=None, path: Path = "field.png", title=""):
    panels = [("reconstructed", f_rec)]
    if f_true is not None:
        panels.insert(0, ("true", f_true))
    if pointwise_err is not None:
        panels.append(("pointwise relative error", pointwise_err))
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.6), squeeze=False)
    for ax, (label, data) in zip(axes[0], panels):
        pcm = ax.pcolormesh(t, v, data, shading="auto", cmap="viridis")
        fig.colorbar(pcm, ax=ax)
        ax.set_xlabel("t")
        ax.set_ylabel("v")
        ax.set_title(label)
    if title:
        fig.suptitle(title)
    _save(fig, path)


def plot_sweep(n_values, phi, path: Path = "sweep.png", title=""):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.semilogy(n_values, phi, "o-", color="tab:blue")
    ax.set_xlabel("truncation index N")
    ax.set_ylabel("relative sup-norm discrepancy")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def plot_probe(lams, min_ratios, path: Path = "probe.png", title=""):
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(lams, min_ratios, "s-", color="tab:blue")
    ax.set_xlabel("weight strength")
    ax.set_ylabel("minimum estimate ratio")
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _save(fig, path)
