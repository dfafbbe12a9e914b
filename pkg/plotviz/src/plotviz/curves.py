"""Learning-curve figures: one panel per (env, arch), one mean line with a
shaded +-1 std band per algorithm, seeds aggregated pointwise.

Before rendering, every summary.csv sitting next to the input curves is
re-derived from the curve files themselves and compared at 1e-9; the plot
refuses to draw numbers it cannot reproduce.
"""

from __future__ import annotations

import glob as globmod
import math
import os
from dataclasses import dataclass

import numpy as np

from .io import CurveSeries, PlotDataError, read_curve, read_summary

SUMMARY_TOL = 1e-9


def curve_avg(series: CurveSeries) -> float:
    return float(series.means.mean())


def curve_final(series: CurveSeries) -> float:
    k = max(1, len(series.means) // 5)
    return float(series.means[-k:].mean())


@dataclass
class GroupStats:
    steps: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_seeds: int


def group_stats(seed_series: list[CurveSeries]) -> GroupStats:
    """Pointwise mean and population std across seeds.

    Seeds are aligned on the union of their env_steps grids; a seed missing
    an eval point simply does not contribute there (NaN-aware reduction), so
    partial runs still render instead of erroring out.
    """
    steps = np.unique(np.concatenate([s.steps for s in seed_series]))
    mat = np.full((len(seed_series), len(steps)), np.nan)
    for i, s in enumerate(seed_series):
        mat[i, np.searchsorted(steps, s.steps)] = s.means
    mean = np.nanmean(mat, axis=0)
    counts = np.sum(~np.isnan(mat), axis=0)
    # population std; avoid the all-NaN slice warning by masking
    centered = np.where(np.isnan(mat), 0.0, mat - mean)
    std = np.sqrt((centered ** 2).sum(axis=0) / counts)
    return GroupStats(steps, mean, std, len(seed_series))


def check_summaries(series: list[CurveSeries]) -> int:
    """Re-derive every sibling summary.csv from curve files and compare.

    Returns the number of summary rows checked. Any disagreement beyond
    1e-9, or a summary whose curve files are not all present, is an error.
    """
    checked = 0
    for d in sorted({os.path.dirname(os.path.abspath(s.path)) for s in series}):
        spath = os.path.join(d, "summary.csv")
        if not os.path.exists(spath):
            continue
        for row in read_summary(spath):
            pattern = os.path.join(
                d, f"curve_{row.algo}_{row.env}_{row.arch}_seed*.csv")
            paths = sorted(globmod.glob(pattern))
            if len(paths) != row.seed_count:
                raise PlotDataError(
                    f"{spath}: row ({row.algo}, {row.env}, {row.arch}) "
                    f"claims {row.seed_count} seeds but {len(paths)} curve "
                    f"files match {os.path.basename(pattern)}")
            avgs = np.array([curve_avg(read_curve(p)) for p in paths])
            finals = np.array([curve_final(read_curve(p)) for p in paths])
            got = {"avg_metric_mean": avgs.mean(), "avg_metric_std": avgs.std(),
                   "final_metric_mean": finals.mean(),
                   "final_metric_std": finals.std()}
            for field, value in got.items():
                claimed = getattr(row, field)
                if not (abs(value - claimed) <= SUMMARY_TOL):
                    raise PlotDataError(
                        f"{spath}: {field} for ({row.algo}, {row.env}, "
                        f"{row.arch}) recomputes to {value!r}, file says "
                        f"{claimed!r} (tolerance {SUMMARY_TOL})")
            checked += 1
    return checked


def load_series(paths: list[str]) -> list[CurveSeries]:
    if not paths:
        raise PlotDataError("no curve files given (empty glob?)")
    series = [read_curve(p) for p in sorted(set(paths))]
    seen: dict[tuple, str] = {}
    for s in series:
        key = (s.algo, s.env, s.arch, s.seed)
        if key in seen:
            raise PlotDataError(
                f"duplicate series {key}: {seen[key]} and {s.path}")
        seen[key] = s.path
    return series


def plot_curves(paths: list[str], out_path: str, dpi: int = 120) -> dict:
    """Render the figure; returns {'panels': ..., 'summary_rows_checked': ...}."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    series = load_series(paths)
    n_checked = check_summaries(series)

    panels: dict[tuple[str, str], dict[str, list[CurveSeries]]] = {}
    for s in series:
        panels.setdefault((s.env, s.arch), {}).setdefault(s.algo, []).append(s)

    keys = sorted(panels)
    ncols = min(3, len(keys))
    nrows = math.ceil(len(keys) / ncols)
    fig, axes = plt.subplots(nrows, ncols, squeeze=False,
                             figsize=(5.2 * ncols, 3.9 * nrows))
    cmap = plt.get_cmap("tab10")

    for idx, key in enumerate(keys):
        ax = axes[idx // ncols][idx % ncols]
        env, arch = key
        for j, algo in enumerate(sorted(panels[key])):
            group = sorted(panels[key][algo], key=lambda s: s.seed)
            st = group_stats(group)
            color = cmap(j % 10)
            ax.plot(st.steps, st.mean, color=color,
                    label=f"{algo} ({st.n_seeds})")
            ax.fill_between(st.steps, st.mean - st.std, st.mean + st.std,
                            color=color, alpha=0.22, linewidth=0)
        ax.set_title(f"{env} / {arch}")
        ax.set_xlabel("env steps")
        ax.set_ylabel("return")
        ax.legend(loc="best")
    for idx in range(len(keys), nrows * ncols):
        axes[idx // ncols][idx % ncols].set_axis_off()

    fig.tight_layout()
    fig.savefig(out_path, dpi=dpi, metadata={"Software": "pbvf-plot"})
    plt.close(fig)
    return {"panels": len(keys), "summary_rows_checked": n_checked}
