"""Bounded FIFO replay storage with uniform sampling.

Records within one episode share a single theta_tilde array (the perturbed
weights that generated every action of that episode), so storing the policy
per transition costs one reference, not one copy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ProtocolError
from .numerics import SeededRng


@dataclass
class TransitionRecord:
    state: np.ndarray
    action: np.ndarray | int | None
    theta_tilde: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool                      # natural termination only; truncation stays False
    logp_behavior: float | None = None


@dataclass
class EpisodeRecord:
    theta_tilde: np.ndarray
    episodic_return: float
    steps: int


class ReplayBuffer:
    """Ring buffer: O(1) push, uniform sampling with replacement, strict
    first-in-first-out eviction once capacity is reached."""

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ProtocolError(f"capacity must be positive, got {capacity}")
        self.capacity = int(capacity)
        self._items: list = []
        self._head = 0  # index of the oldest element once full

    def __len__(self) -> int:
        return len(self._items)

    def push(self, item) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._head] = item
            self._head = (self._head + 1) % self.capacity

    def __getitem__(self, idx: int):
        """Logical indexing: 0 is the oldest stored item."""
        n = len(self._items)
        if not 0 <= idx < n:
            raise IndexError(idx)
        return self._items[(self._head + idx) % self.capacity if n == self.capacity
                           else idx]

    def items(self) -> list:
        return [self[i] for i in range(len(self._items))]

    def sample(self, rng: SeededRng, n: int) -> list:
        if not self._items:
            raise ProtocolError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._items), size=n)
        return [self._items[i] for i in idx]
