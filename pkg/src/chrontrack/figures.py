"""Matplotlib renderings of the report tables.

Each calendar CSV gets a companion PNG: one row per year, one column per
7-day slot, gray where the snapshot is empty or the community absent.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .reports import N_WEEK_COLUMNS, CalendarTable


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_calendar_heatmap(
    table: CalendarTable,
    path: str | Path,
    title: str,
    cbar_label: str,
    cmap: str = "viridis",
    vmin: float | None = None,
    vmax: float | None = None,
) -> Path:
    plt = _pyplot()
    grid = np.full((len(table.years), N_WEEK_COLUMNS), np.nan)
    for (year, week), value in table.cells.items():
        if value is not None:
            grid[table.years.index(year), week] = value

    masked = np.ma.masked_invalid(grid)
    fig, ax = plt.subplots(figsize=(11, max(2.0, 0.35 * len(table.years) + 1.2)))
    colormap = plt.get_cmap(cmap).copy()
    colormap.set_bad("0.85")
    im = ax.imshow(masked, aspect="auto", cmap=colormap, vmin=vmin, vmax=vmax, interpolation="nearest")
    ax.set_yticks(range(len(table.years)), [str(y) for y in table.years])
    ax.set_xticks(range(0, N_WEEK_COLUMNS, 4))
    ax.set_xlabel("week of year")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label=cbar_label, shrink=0.9)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
