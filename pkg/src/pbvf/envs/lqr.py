"""One-dimensional linear-quadratic regulator.

Scalar double-integrator-free form: s' = clip(s + a, -2, 2), quadratic cost
on the pre-step state and the raw action, fixed start s0 = 1. Episodes are
cut at a step horizon (no natural termination), so discounted learners should
bootstrap through the cut. Observations are used raw; this task opts out of
observation normalization.
"""

from __future__ import annotations

import numpy as np

from ..numerics import SeededRng
from .base import EnvModel

STATE_CLIP = 2.0
START_STATE = 1.0
HORIZON = 50


class LqrEnv(EnvModel):
    name = "lqr"
    state_dim = 1
    action_kind = "continuous"
    action_dim = 1
    max_episode_steps = HORIZON
    obs_normalizable = False
    state_low = np.array([-STATE_CLIP])
    state_high = np.array([STATE_CLIP])

    def __init__(self, seed: int = 0, rng_stream: tuple[int, ...] = (901,),
                 horizon: int = HORIZON):
        super().__init__(seed, rng_stream)
        self.max_episode_steps = int(horizon)

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        return np.array([START_STATE])

    def _dynamics(self, action):
        s = float(self._state[0])
        a = float(action[0])
        reward = -(s * s + a * a)
        s_next = min(max(s + a, -STATE_CLIP), STATE_CLIP)
        return np.array([s_next]), reward, False


def riccati_optimum() -> tuple[float, float, float]:
    """Exact infinite-horizon solution for the unclipped scalar system.

    With dynamics s' = s + a and cost s^2 + a^2, the Riccati fixed point is
    P = 1 + P/(1+P), i.e. P^2 = P + 1, the golden ratio. The optimal policy
    is a = -K s with K = P/(1+P), and the return from s0 is -P s0^2.

    Returns (optimal_weight, optimal_bias, optimal_return_from_s0).
    """
    p = (1.0 + np.sqrt(5.0)) / 2.0
    k = p / (1.0 + p)
    return -k, 0.0, -p * START_STATE * START_STATE
