"""Readers for the harness CSV artifacts.

Schemas are duplicated here on purpose: the file layout is the contract
between the training side and this package, so the reader states its own
expectations and checks them against what it finds. Every error names the
offending file.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

CURVE_HEADER = ["env_steps", "mean_return", "std_return"]
SUMMARY_HEADER = ["algo", "env", "arch", "seed_count", "avg_metric_mean",
                  "avg_metric_std", "final_metric_mean", "final_metric_std"]
LANDSCAPE_HEADER = ["theta_w", "theta_b", "true_J", "predicted_V"]
THETA_HEADER = ["theta_w", "theta_b"]
ORACLE_HEADER = ["instance", "thm1_maxerr", "thm3_maxerr", "degris_bias"]


class PlotDataError(Exception):
    """An input file is missing, malformed, or inconsistent."""


@dataclass
class CurveSeries:
    algo: str
    env: str
    arch: str
    seed: int
    steps: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    path: str


@dataclass
class SummaryRow:
    algo: str
    env: str
    arch: str
    seed_count: int
    avg_metric_mean: float
    avg_metric_std: float
    final_metric_mean: float
    final_metric_std: float
    path: str


def _read_rows(path: str, header: list[str]) -> list[list[str]]:
    if not os.path.exists(path):
        raise PlotDataError(f"{path}: no such file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise PlotDataError(f"{path}: empty file")
        if got != header:
            raise PlotDataError(f"{path}: expected header {header}, got {got}")
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(header):
            raise PlotDataError(
                f"{path}: row width {len(row)} does not match header")
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    return rows


def _floats(path: str, row: list[str], idx: slice | list[int]) -> list[float]:
    cells = row[idx] if isinstance(idx, slice) else [row[i] for i in idx]
    try:
        return [float(c) for c in cells]
    except ValueError as e:
        raise PlotDataError(f"{path}: bad numeric cell ({e})")


def parse_curve_name(path: str) -> tuple[str, str, str, int]:
    """curve_{algo}_{env}_{arch}_seed{N}.csv -> (algo, env, arch, N).

    The three name fields never contain underscores (hyphens are used
    instead), so a plain split is unambiguous.
    """
    base = os.path.basename(path)
    stem, ext = os.path.splitext(base)
    parts = stem.split("_")
    if ext != ".csv" or len(parts) != 5 or parts[0] != "curve" \
            or not parts[4].startswith("seed"):
        raise PlotDataError(
            f"{path}: expected a name like curve_algo_env_arch_seedN.csv")
    try:
        seed = int(parts[4][4:])
    except ValueError:
        raise PlotDataError(f"{path}: bad seed field {parts[4]!r}")
    return parts[1], parts[2], parts[3], seed


def read_curve(path: str) -> CurveSeries:
    algo, env, arch, seed = parse_curve_name(path)
    rows = _read_rows(path, CURVE_HEADER)
    vals = np.array([_floats(path, r, slice(0, 3)) for r in rows])
    steps = vals[:, 0]
    if np.any(np.diff(steps) <= 0):
        raise PlotDataError(f"{path}: env_steps must be strictly increasing")
    return CurveSeries(algo, env, arch, seed, steps.astype(np.int64),
                       vals[:, 1], vals[:, 2], path)


def read_summary(path: str) -> list[SummaryRow]:
    rows = _read_rows(path, SUMMARY_HEADER)
    out = []
    for r in rows:
        try:
            count = int(r[3])
        except ValueError:
            raise PlotDataError(f"{path}: bad seed_count {r[3]!r}")
        nums = _floats(path, r, [4, 5, 6, 7])
        out.append(SummaryRow(r[0], r[1], r[2], count, *nums, path=path))
    return out


def read_landscape(path: str) -> list[tuple[float, float, float, float]]:
    rows = _read_rows(path, LANDSCAPE_HEADER)
    return [tuple(_floats(path, r, slice(0, 4))) for r in rows]


def read_thetas(path: str) -> np.ndarray:
    rows = _read_rows(path, THETA_HEADER)
    return np.array([_floats(path, r, slice(0, 2)) for r in rows])


def read_oracle(path: str) -> list[tuple[str, float, float, float]]:
    rows = _read_rows(path, ORACLE_HEADER)
    return [(r[0], *_floats(path, r, [1, 2, 3])) for r in rows]
