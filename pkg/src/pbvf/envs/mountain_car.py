"""Continuous-action mountain car (999-step limit).

An underpowered car in a valley must build momentum to reach the flag on the
right hill. Reward is a quadratic penalty on the commanded action plus a +100
bonus when the goal is reached, so doing nothing scores 0 and only efficient
climbs score well. The engine force is the action clipped to [-1, 1]; the
penalty uses the raw command.
"""

from __future__ import annotations

import math

import numpy as np

from ..numerics import SeededRng
from .base import EnvModel

MIN_ACTION = -1.0
MAX_ACTION = 1.0
MIN_POSITION = -1.2
MAX_POSITION = 0.6
MAX_SPEED = 0.07
GOAL_POSITION = 0.45
GOAL_VELOCITY = 0.0
POWER = 0.0015


class MountainCarContinuousEnv(EnvModel):
    name = "mountaincar-cont"
    state_dim = 2
    action_kind = "continuous"
    action_dim = 1
    max_episode_steps = 999
    state_low = np.array([MIN_POSITION, -MAX_SPEED])
    state_high = np.array([MAX_POSITION, MAX_SPEED])

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        return np.array([float(rng.uniform(-0.6, -0.4)), 0.0])

    def _dynamics(self, action):
        position, velocity = (float(v) for v in self._state)
        raw = float(action[0])
        force = min(max(raw, MIN_ACTION), MAX_ACTION)

        velocity += force * POWER - 0.0025 * math.cos(3.0 * position)
        velocity = min(max(velocity, -MAX_SPEED), MAX_SPEED)
        position += velocity
        position = min(max(position, MIN_POSITION), MAX_POSITION)
        if position == MIN_POSITION and velocity < 0.0:
            velocity = 0.0

        terminated = position >= GOAL_POSITION and velocity >= GOAL_VELOCITY
        reward = 100.0 if terminated else 0.0
        reward -= 0.1 * raw * raw
        return np.array([position, velocity]), reward, terminated
