"""Running observation whitening with Welford accumulation.

Stats update only during training interaction; evaluation applies the frozen
statistics. Both call counts are tracked so runs that switch normalization
off can prove the normalizer was never consulted.
"""

from __future__ import annotations

import numpy as np

from ..numerics import DTYPE

STD_FLOOR = 1e-8


class RunningNormalizer:
    def __init__(self, dim: int):
        self.dim = int(dim)
        self.count = 0
        self.mean = np.zeros(self.dim, dtype=DTYPE)
        self.m2 = np.zeros(self.dim, dtype=DTYPE)
        self.update_calls = 0
        self.apply_calls = 0

    def update(self, obs: np.ndarray) -> None:
        obs = np.asarray(obs, dtype=DTYPE)
        self.update_calls += 1
        self.count += 1
        delta = obs - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (obs - self.mean)

    @property
    def std(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(self.dim, dtype=DTYPE)
        return np.sqrt(self.m2 / self.count)

    def apply(self, obs: np.ndarray) -> np.ndarray:
        """(obs - mean) / max(std, floor); all zeros before any update."""
        self.apply_calls += 1
        obs = np.asarray(obs, dtype=DTYPE)
        if self.count == 0:
            return np.zeros_like(obs)
        return (obs - self.mean) / np.maximum(self.std, STD_FLOOR)

    def apply_batch(self, obs: np.ndarray) -> np.ndarray:
        self.apply_calls += 1
        obs = np.atleast_2d(np.asarray(obs, dtype=DTYPE))
        if self.count == 0:
            return np.zeros_like(obs)
        return (obs - self.mean[None, :]) / np.maximum(self.std, STD_FLOOR)[None, :]


def normalizer_update_apply(norm: RunningNormalizer, obs: np.ndarray) -> np.ndarray:
    norm.update(obs)
    return norm.apply(obs)
