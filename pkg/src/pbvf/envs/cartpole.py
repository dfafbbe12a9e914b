"""Cart-pole balancing, v1 variant (500-step limit, +1 reward per step).

Standard formulation: a cart on a frictionless track with a pole hinged on
top, two discrete actions pushing left or right with fixed force, explicit
Euler integration at 0.02s. The episode terminates once the cart leaves
+/-2.4 or the pole tilts past 12 degrees; the observation emitted on that
final step may exceed those thresholds, which is why the declared state
bounds are wider.
"""

from __future__ import annotations

import math

import numpy as np

from ..numerics import SeededRng
from .base import EnvModel

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_POLE_LENGTH = 0.5
POLE_MASS_LENGTH = MASS_POLE * HALF_POLE_LENGTH
FORCE_MAG = 10.0
TAU = 0.02
THETA_THRESHOLD = 12.0 * 2.0 * math.pi / 360.0
X_THRESHOLD = 2.4


class CartPoleEnv(EnvModel):
    name = "cartpole"
    state_dim = 4
    action_kind = "discrete"
    action_dim = 2
    max_episode_steps = 500
    state_low = np.array([-2.0 * X_THRESHOLD, -np.inf, -2.0 * THETA_THRESHOLD, -np.inf])
    state_high = np.array([2.0 * X_THRESHOLD, np.inf, 2.0 * THETA_THRESHOLD, np.inf])

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        return rng.uniform(-0.05, 0.05, size=4)

    def _dynamics(self, action):
        x, x_dot, theta, theta_dot = (float(v) for v in self._state)
        force = FORCE_MAG if action == 1 else -FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)

        temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS
        theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
            HALF_POLE_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS)
        )
        x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS

        x = x + TAU * x_dot
        x_dot = x_dot + TAU * x_acc
        theta = theta + TAU * theta_dot
        theta_dot = theta_dot + TAU * theta_acc

        terminated = (
            x < -X_THRESHOLD or x > X_THRESHOLD
            or theta < -THETA_THRESHOLD or theta > THETA_THRESHOLD
        )
        return np.array([x, x_dot, theta, theta_dot]), 1.0, terminated
