"""Figure rendering for the command-line report path.

All figures are written to files (Agg backend); nothing is shown
interactively.  The numeric exports stay delimited text, figures are a
companion, so every renderer takes data the CLI already has.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fields import VelocityField

__all__ = [
    "save_field_figure",
    "save_convergence_figure",
    "save_gre_figure",
    "save_histogram_figure",
]

_DPI = 150


def save_field_figure(path: str, v: VelocityField, mask: np.ndarray | None = None,
                      title: str | None = None) -> None:
    """Two-panel heat map of vx and vy (row 0 at the bottom)."""
    aspect = max(v.grid.width / v.grid.height, 1.0)
    fig, axes = plt.subplots(2, 1, figsize=(min(12, 2.5 * aspect), 5.0),
                             constrained_layout=True)
    for ax, comp, name in zip(axes, (v.vx, v.vy), ("vx", "vy")):
        data = np.where(mask, comp, np.nan) if mask is not None else comp
        im = ax.imshow(data, origin="lower", aspect="auto", cmap="viridis")
        ax.set_ylabel(name)
        fig.colorbar(im, ax=ax, shrink=0.9)
    if title:
        fig.suptitle(title)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_convergence_figure(path: str, abs_errors, epsilon: float | None = None,
                            title: str | None = None) -> None:
    """Convergence history of the iteration (log scale when possible)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    k = np.arange(1, len(abs_errors) + 1)
    ax.plot(k, abs_errors, marker="o", markersize=3)
    # Log scale needs a positive value; an exact backend yields all zeros.
    if np.any(np.asarray(abs_errors, dtype=float) > 0):
        ax.set_yscale("log")
    if epsilon is not None:
        ax.axhline(epsilon, color="tab:red", linestyle="--", linewidth=1,
                   label=f"epsilon = {epsilon:g}")
        ax.legend()
    ax.set_xlabel("red-black iteration")
    ax.set_ylabel("max absolute update")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_gre_figure(path: str, curves: dict, stars: dict | None = None,
                    title: str | None = None) -> None:
    """GRE against iteration count, one curve per label.

    ``stars`` maps the same labels to their one-iteration solver bound,
    drawn as a horizontal dashed line in the curve's color.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    any_positive = False
    for label, values in curves.items():
        k = np.arange(1, len(values) + 1)
        line, = ax.plot(k, values, marker="o", markersize=3, label=str(label))
        any_positive |= bool(np.any(np.asarray(values, dtype=float) > 0))
        if stars and label in stars:
            ax.axhline(stars[label], color=line.get_color(), linestyle="--",
                       linewidth=1, alpha=0.7)
    # Log scale needs a positive value; an exact backend yields all zeros.
    if any_positive:
        ax.set_yscale("log")
    ax.set_xlabel("red-black iteration")
    ax.set_ylabel("GRE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_histogram_figure(path: str, counts: dict, title: str | None = None) -> None:
    """Bar chart of the GRE category histogram."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    names = list(counts)
    ax.bar(range(len(names)), [counts[n] for n in names], color="tab:blue")
    ax.set_xticks(range(len(names)), names, rotation=20)
    ax.set_ylabel("runs")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
