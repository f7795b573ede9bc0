"""Matplotlib figure rendering for run reports.

Figures are rendered straight to files (Agg backend) next to the CSV output;
nothing here is interactive.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_profiles(
    path: str,
    nodes: np.ndarray,
    snapshots: Sequence[tuple[float, np.ndarray]],
    *,
    ylabel: str = "density",
    title: str | None = None,
) -> None:
    """Overlay of field profiles at the snapshot times."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for t, values in snapshots:
        ax.plot(nodes, values, lw=1.2, label=f"t = {t:g}")
    ax.set_xlabel("trait x")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if snapshots:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_series(
    path: str,
    times: np.ndarray,
    values: np.ndarray,
    *,
    ylabel: str,
    title: str | None = None,
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(times, values, lw=1.4)
    ax.set_xlabel("time")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_diagnostics(
    path: str,
    times: np.ndarray,
    rho: np.ndarray,
    argmax_x: np.ndarray,
    shares: np.ndarray,
    *,
    title: str | None = None,
) -> None:
    """Three stacked panels: total mass, argmax trajectory, mass shares."""
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].plot(times, rho, lw=1.4)
    axes[0].set_ylabel(r"total mass $\rho$")
    axes[1].plot(times, argmax_x, lw=1.4)
    axes[1].set_ylabel("argmax x")
    for k in range(shares.shape[1] if shares.ndim == 2 else 0):
        axes[2].plot(times, shares[:, k], lw=1.4, label=f"tracked point {k + 1}")
    axes[2].set_ylabel("mass share")
    axes[2].set_xlabel("time")
    if shares.ndim == 2 and shares.shape[1]:
        axes[2].legend(fontsize=8)
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_eigenvector(
    path: str,
    nodes: np.ndarray,
    p: np.ndarray,
    p_hat: np.ndarray,
    *,
    title: str | None = None,
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(nodes, p, lw=1.4, label="eigenvector p")
    ax.plot(nodes, p_hat, lw=1.4, ls="--", label="reweighted p-hat")
    ax.set_xlabel("trait x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_lambda_curves(
    path: str,
    radii: np.ndarray,
    eps_values: np.ndarray,
    table: np.ndarray,
    *,
    title: str | None = None,
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, eps in enumerate(eps_values):
        ax.plot(radii, table[:, j], marker="o", lw=1.2, label=f"eps = {eps:g}")
    ax.set_xlabel("half-width R")
    ax.set_ylabel("principal eigenvalue")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
