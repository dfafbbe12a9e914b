"""CSV artifacts: learning curves, summaries, landscapes, oracle reports.

Floats are written with repr(), which in Python 3 emits the shortest string
that parses back to the identical float64, so a write/read cycle is exact.
Headers are fixed per artifact kind and checked on read.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from ..errors import DataFormatError
from .metrics import EvalPoint

CURVE_HEADER = ["env_steps", "mean_return", "std_return"]
SUMMARY_HEADER = ["algo", "env", "arch", "seed_count", "avg_metric_mean",
                  "avg_metric_std", "final_metric_mean", "final_metric_std"]
LANDSCAPE_HEADER = ["theta_w", "theta_b", "true_J", "predicted_V"]
ORACLE_HEADER = ["instance", "thm1_maxerr", "thm3_maxerr", "degris_bias"]
THETA_HEADER = ["theta_w", "theta_b"]


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


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str, header: list[str], rows) -> None:
    """Atomic-ish write: build in memory, write once."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str, header: list[str]) -> list[list[str]]:
    if not os.path.exists(path):
        raise DataFormatError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file")
        if got != header:
            raise DataFormatError(f"{path}: expected header {header}, got {got}")
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(header):
            raise DataFormatError(f"{path}: row width {len(row)} != {len(header)}")
    return rows


def write_curve_csv(path: str, curve: list[EvalPoint]) -> None:
    write_csv(path, CURVE_HEADER,
              [(p.env_steps, p.mean_return, p.std_return) for p in curve])


def read_curve_csv(path: str) -> list[EvalPoint]:
    rows = read_csv(path, CURVE_HEADER)
    try:
        return [EvalPoint(int(r[0]), float(r[1]), float(r[2])) for r in rows]
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")


def write_summary_csv(path: str, rows: list[SummaryRow]) -> None:
    write_csv(path, SUMMARY_HEADER,
              [(r.algo, r.env, r.arch, r.seed_count, r.avg_metric_mean,
                r.avg_metric_std, r.final_metric_mean, r.final_metric_std)
               for r in rows])


def read_summary_csv(path: str) -> list[SummaryRow]:
    rows = read_csv(path, SUMMARY_HEADER)
    try:
        return [SummaryRow(r[0], r[1], r[2], int(r[3]), float(r[4]), float(r[5]),
                           float(r[6]), float(r[7])) for r in rows]
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")


def write_landscape_csv(path: str, ws, bs, true_j, pred_v) -> None:
    write_csv(path, LANDSCAPE_HEADER, zip(ws, bs, true_j, pred_v))


def read_landscape_csv(path: str):
    rows = read_csv(path, LANDSCAPE_HEADER)
    try:
        cols = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")
    if cols.size == 0:
        raise DataFormatError(f"{path}: no data rows")
    return cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3]


def write_oracle_csv(path: str, rows) -> None:
    write_csv(path, ORACLE_HEADER, rows)


def read_oracle_csv(path: str):
    rows = read_csv(path, ORACLE_HEADER)
    try:
        return [(r[0], float(r[1]), float(r[2]), float(r[3])) for r in rows]
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")


def write_theta_csv(path: str, thetas: np.ndarray) -> None:
    arr = np.atleast_2d(np.asarray(thetas))
    if arr.shape[1] != 2:
        raise DataFormatError("theta overlay files hold 2-parameter policies")
    write_csv(path, THETA_HEADER, arr)


def read_theta_csv(path: str) -> np.ndarray:
    rows = read_csv(path, THETA_HEADER)
    try:
        return np.array([[float(r[0]), float(r[1])] for r in rows], dtype=np.float64)
    except ValueError as e:
        raise DataFormatError(f"{path}: {e}")
