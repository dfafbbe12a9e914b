"""Environment contract shared by every task in the lab.

Episodes follow reset -> step* -> (terminated | truncated). `terminated`
means the task itself ended (pole fell, goal reached); `truncated` means the
step limit cut the episode. Value bootstrapping should continue through
truncation and stop at termination, so the two flags are kept separate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError, ProtocolError
from ..numerics import DTYPE, SeededRng


@dataclass
class StepResult:
    state: np.ndarray
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


class EnvModel:
    """Base class: subclasses set the metadata below and implement
    _reset_state(rng) and _dynamics(action) -> (next_state, reward, terminated)."""

    name: str = ""
    state_dim: int = 0
    action_kind: str = "continuous"  # or "discrete"
    action_dim: int = 0              # continuous width, or number of discrete actions
    max_episode_steps: int = 0
    obs_normalizable: bool = True
    # Inclusive bounds every emitted observation must respect.
    state_low: np.ndarray = None
    state_high: np.ndarray = None

    def __init__(self, seed: int = 0, rng_stream: tuple[int, ...] = (901,)):
        self.rng = SeededRng(seed, stream=rng_stream)
        self._state: np.ndarray | None = None
        self._steps = 0
        self._needs_reset = True

    @property
    def needs_reset(self) -> bool:
        return self._needs_reset

    def reset(self) -> np.ndarray:
        self._state = np.asarray(self._reset_state(self.rng), dtype=DTYPE)
        self._steps = 0
        self._needs_reset = False
        return self._state.copy()

    def step(self, action) -> StepResult:
        if self._needs_reset:
            raise ProtocolError(f"{self.name}: step() before reset() or after episode end")
        action = self._check_action(action)
        next_state, reward, terminated = self._dynamics(action)
        self._state = np.asarray(next_state, dtype=DTYPE)
        self._steps += 1
        truncated = (not terminated) and self._steps >= self.max_episode_steps
        if terminated or truncated:
            self._needs_reset = True
        return StepResult(self._state.copy(), float(reward), bool(terminated), truncated)

    def _check_action(self, action):
        if self.action_kind == "discrete":
            a = int(action)
            if not 0 <= a < self.action_dim:
                raise ProtocolError(
                    f"{self.name}: discrete action {a} outside [0, {self.action_dim})"
                )
            return a
        a = np.asarray(action, dtype=DTYPE).reshape(-1)
        if a.shape[0] != self.action_dim:
            raise ProtocolError(
                f"{self.name}: action width {a.shape[0]} != {self.action_dim}"
            )
        if not np.all(np.isfinite(a)):
            raise NumericError(f"{self.name}: non-finite action {a}")
        return a

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        raise NotImplementedError

    def _dynamics(self, action):
        raise NotImplementedError
