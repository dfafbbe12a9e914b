"""Run-level scalar metrics over an evaluation curve.

avg is the mean return over every evaluation of the run; final is the mean
over the last fifth of the evaluation points.
"""

from __future__ import annotations

import numpy as np

from ..algorithms.common import EvalPoint
from ..errors import DataFormatError

__all__ = ["EvalPoint", "avg_metric", "final_metric"]


def _means(curve: list[EvalPoint]) -> np.ndarray:
    if not curve:
        raise DataFormatError("empty evaluation curve has no metrics")
    return np.array([p.mean_return for p in curve], dtype=np.float64)


def avg_metric(curve: list[EvalPoint]) -> float:
    return float(_means(curve).mean())


def final_metric(curve: list[EvalPoint]) -> float:
    means = _means(curve)
    k = max(1, len(means) // 5)
    return float(means[-k:].mean())
