"""Side-by-side heatmaps of the true return and the critic's value over the
two-parameter policy plane, with optional trajectory arrows and behavior
markers.

Both panels share one color scale so the eye can compare levels directly.
The grid must be complete (every (w, b) cell present exactly once) and span
[-5, 5] on both axes; anything else is a data error, reported with the
missing cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import PlotDataError, read_landscape, read_thetas

BOUND = 5.0
BOUND_TOL = 1e-6
MAX_ARROWS = 40


@dataclass
class LandscapeGrid:
    axes_w: np.ndarray
    axes_b: np.ndarray
    true_j: np.ndarray   # [ib, iw]
    pred_v: np.ndarray   # [ib, iw]

    @property
    def resolution(self) -> int:
        return len(self.axes_w)

    def true_max(self) -> tuple[float, float]:
        ib, iw = np.unravel_index(np.argmax(self.true_j), self.true_j.shape)
        return float(self.axes_w[iw]), float(self.axes_b[ib])


def assemble_grid(path: str) -> LandscapeGrid:
    rows = read_landscape(path)
    uw = np.unique([r[0] for r in rows])
    ub = np.unique([r[1] for r in rows])
    if len(uw) < 2 or len(ub) < 2:
        raise PlotDataError(f"{path}: grid needs at least 2 points per axis")
    if len(uw) != len(ub):
        raise PlotDataError(
            f"{path}: grid is {len(uw)}x{len(ub)}, expected square")
    for name, ax in (("theta_w", uw), ("theta_b", ub)):
        if abs(ax[0] + BOUND) > BOUND_TOL or abs(ax[-1] - BOUND) > BOUND_TOL:
            raise PlotDataError(
                f"{path}: {name} spans [{ax[0]}, {ax[-1]}], "
                f"expected [-{BOUND}, {BOUND}]")

    seen: dict[tuple[float, float], tuple[float, float]] = {}
    for w, b, tj, pv in rows:
        if (w, b) in seen:
            raise PlotDataError(f"{path}: duplicate cell ({w}, {b})")
        seen[(w, b)] = (tj, pv)

    missing = [(w, b) for w in uw for b in ub if (w, b) not in seen]
    if missing:
        shown = ", ".join(f"({w:g}, {b:g})" for w, b in missing[:12])
        more = f" and {len(missing) - 12} more" if len(missing) > 12 else ""
        raise PlotDataError(
            f"{path}: incomplete grid, {len(missing)} missing cells: "
            f"{shown}{more}")

    r = len(uw)
    true_j = np.empty((r, r))
    pred_v = np.empty((r, r))
    for iw, w in enumerate(uw):
        for ib, b in enumerate(ub):
            true_j[ib, iw], pred_v[ib, iw] = seen[(w, b)]
    return LandscapeGrid(uw, ub, true_j, pred_v)


def _subsample(points: np.ndarray, limit: int) -> np.ndarray:
    if len(points) <= limit + 1:
        return points
    idx = np.unique(np.linspace(0, len(points) - 1, limit + 1).astype(int))
    return points[idx]


def plot_landscape(grid_path: str, out_path: str, traj_path: str | None = None,
                   behav_path: str | None = None, dpi: int = 120) -> dict:
    """Render the figure; returns the resolution and the true-return argmax."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grid = assemble_grid(grid_path)
    traj = _subsample(read_thetas(traj_path), MAX_ARROWS) \
        if traj_path else None
    behav = read_thetas(behav_path) if behav_path else None

    vmin = min(np.nanmin(grid.true_j), np.nanmin(grid.pred_v))
    vmax = max(np.nanmax(grid.true_j), np.nanmax(grid.pred_v))
    h = 2 * BOUND / (grid.resolution - 1)
    extent = (-BOUND - h / 2, BOUND + h / 2, -BOUND - h / 2, BOUND + h / 2)

    fig, (ax_t, ax_p) = plt.subplots(1, 2, figsize=(10.4, 4.6))
    ims = []
    for ax, values, title in ((ax_t, grid.true_j, "true return"),
                              (ax_p, grid.pred_v, "critic value")):
        ims.append(ax.imshow(values, origin="lower", extent=extent,
                             vmin=vmin, vmax=vmax, cmap="viridis",
                             aspect="equal"))
        ax.set_xlabel("theta_w")
        ax.set_ylabel("theta_b")
        ax.set_title(title)
        if behav is not None:
            ax.plot(behav[:, 0], behav[:, 1], ".", color="tab:blue",
                    markersize=2.5, alpha=0.55, linestyle="none")
        if traj is not None and len(traj) > 1:
            for (x0, y0), (x1, y1) in zip(traj[:-1], traj[1:]):
                ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                            arrowprops=dict(arrowstyle="->", color="red",
                                            lw=1.1))
    w_star, b_star = grid.true_max()
    ax_t.plot([w_star], [b_star], marker="*", color="white",
              markeredgecolor="black", markersize=11, linestyle="none")

    fig.colorbar(ims[0], ax=[ax_t, ax_p], shrink=0.92, pad=0.02)
    fig.savefig(out_path, dpi=dpi, metadata={"Software": "pbvf-plot"})
    plt.close(fig)
    return {"resolution": grid.resolution, "true_max": (w_star, b_star),
            "out_path": out_path}
