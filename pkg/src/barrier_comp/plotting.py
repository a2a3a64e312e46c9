"""Static SVG figures: level sets of the composed barrier and trajectories.

Contours come from matplotlib's marching-squares contouring of the grid
values; matplotlib is imported lazily so the numerical core never pays
for it.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "barrier-comp"
    return plt


def leaf_grid(layered, grid):
    vals, _ = layered.leaf_values(grid.points)
    return vals.reshape((layered.n_leaves,) + grid.shape)


def draw_levels(ax, grid, layered=None, color="tab:red", exact=True):
    """Zero contours of ``h`` (solid) and ``h_c`` (black), leaf boundaries dashed."""
    X, Y = np.meshgrid(grid.axes[0], grid.axes[1], indexing="ij")
    if layered is not None:
        for leaf in leaf_grid(layered, grid):
            if leaf.min() < 0 < leaf.max():
                ax.contour(X, Y, leaf, levels=[0.0], colors="0.75", linestyles="dashed", linewidths=0.6)
    if exact:
        ax.contourf(X, Y, grid.field("h_c"), levels=[-np.inf, 0.0], colors=["0.88"])
        ax.contour(X, Y, grid.field("h_c"), levels=[0.0], colors="k", linewidths=1.0)
    cs = ax.contour(X, Y, grid.field("h"), levels=[0.0], colors=color, linewidths=1.4)
    ax.set_aspect("equal")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    return cs


def grid_figure(grids, layered, labels=None):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 5))
    colors = ["tab:red", "tab:blue", "tab:green", "tab:orange", "tab:purple"]
    for i, grid in enumerate(grids):
        draw_levels(ax, grid, layered if i == 0 else None, color=colors[i % len(colors)], exact=(i == 0))
    if labels:
        from matplotlib.lines import Line2D

        handles = [Line2D([], [], color=colors[i % len(colors)], label=lab) for i, lab in enumerate(labels)]
        handles.append(Line2D([], [], color="k", label="exact"))
        ax.legend(handles=handles, loc="upper right", fontsize=8)
    return fig


def trajectory_figure(grid, layered, trajectories, target=None, labels=None):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 5))
    draw_levels(ax, grid, layered)
    for i, tr in enumerate(trajectories):
        lab = labels[i] if labels else None
        ax.plot(tr.states[:, 0], tr.states[:, 1], lw=1.5, label=lab)
        ax.plot(*tr.states[0, :2], "o", ms=4, color="k")
    if target is not None:
        ax.plot(*np.asarray(target)[:2], "*", ms=10, color="tab:green")
    if labels:
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlim(grid.axes[0][0], grid.axes[0][-1])
    ax.set_ylim(grid.axes[1][0], grid.axes[1][-1])
    return fig


def save_svg(fig, path):
    plt = _plt()
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
