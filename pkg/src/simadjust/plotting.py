"""Render divergence grids as heatmap panels saved to image files."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InputError
from .repro import GridCell

__all__ = ["render_grid_heatmap"]


def render_grid_heatmap(cells: Sequence[GridCell], path: str) -> str:
    """One panel per c value: n on the x axis, u1 on the y axis, color is
    -log10 of the single-vs-double adjustment gap. Returns ``path``.

    Cells above the diagonal (u1 >= n) do not exist and stay blank.
    """
    if not cells:
        raise InputError("no grid cells to render")
    c_values = sorted({cell.c for cell in cells})
    n_max = max(cell.n for cell in cells)
    n_min = min(cell.n for cell in cells)
    fig, axes = plt.subplots(
        1,
        len(c_values),
        figsize=(4.6 * len(c_values), 4.2),
        squeeze=False,
        constrained_layout=True,
    )
    for ax, c in zip(axes[0], c_values):
        mat = np.full((n_max - 1, n_max - n_min + 1), np.nan)
        for cell in cells:
            if cell.c == c:
                mat[cell.u1 - 1, cell.n - n_min] = cell.neg_log10_diff
        img = ax.imshow(
            mat,
            origin="lower",
            aspect="auto",
            extent=(n_min - 0.5, n_max + 0.5, 0.5, n_max - 0.5),
            cmap="viridis",
        )
        ax.set_title(f"c = {c:g}")
        ax.set_xlabel("observations n")
        ax.set_ylabel("first-row count u1")
        fig.colorbar(img, ax=ax, label="-log10 |single - double|")
    fig.suptitle("Gap between single and double adjustment")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
