"""Two-link underactuated pendulum swing-up (book dynamics, RK4 at 0.2s).

Only the joint between the links is actuated, with torque in {-1, 0, +1}.
The observation is the angles' sines/cosines plus both angular velocities.
Reward is -1 per step until the free end swings above one link length
(-cos(t1) - cos(t1 + t2) > 1), which ends the episode with reward 0 on the
terminating transition.
"""

from __future__ import annotations

import math

import numpy as np

from ..numerics import SeededRng
from .base import EnvModel

DT = 0.2
LINK_LENGTH_1 = 1.0
LINK_MASS_1 = 1.0
LINK_MASS_2 = 1.0
LINK_COM_1 = 0.5
LINK_COM_2 = 0.5
LINK_MOI = 1.0
GRAVITY = 9.8
MAX_VEL_1 = 4.0 * math.pi
MAX_VEL_2 = 9.0 * math.pi
TORQUES = (-1.0, 0.0, 1.0)


def _wrap(x: float, low: float, high: float) -> float:
    diff = high - low
    while x > high:
        x -= diff
    while x < low:
        x += diff
    return x


def _dsdt(s: np.ndarray, torque: float) -> np.ndarray:
    m1, m2 = LINK_MASS_1, LINK_MASS_2
    l1 = LINK_LENGTH_1
    lc1, lc2 = LINK_COM_1, LINK_COM_2
    i1 = i2 = LINK_MOI
    g = GRAVITY
    theta1, theta2, dtheta1, dtheta2 = s

    d1 = (
        m1 * lc1 ** 2
        + m2 * (l1 ** 2 + lc2 ** 2 + 2.0 * l1 * lc2 * math.cos(theta2))
        + i1 + i2
    )
    d2 = m2 * (lc2 ** 2 + l1 * lc2 * math.cos(theta2)) + i2
    phi2 = m2 * lc2 * g * math.cos(theta1 + theta2 - math.pi / 2.0)
    phi1 = (
        -m2 * l1 * lc2 * dtheta2 ** 2 * math.sin(theta2)
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * math.sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * math.cos(theta1 - math.pi / 2.0)
        + phi2
    )
    ddtheta2 = (
        torque + d2 / d1 * phi1
        - m2 * l1 * lc2 * dtheta1 ** 2 * math.sin(theta2)
        - phi2
    ) / (m2 * lc2 ** 2 + i2 - d2 ** 2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return np.array([dtheta1, dtheta2, ddtheta1, ddtheta2])


def _rk4_step(s: np.ndarray, torque: float, dt: float) -> np.ndarray:
    k1 = _dsdt(s, torque)
    k2 = _dsdt(s + dt / 2.0 * k1, torque)
    k3 = _dsdt(s + dt / 2.0 * k2, torque)
    k4 = _dsdt(s + dt * k3, torque)
    return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class AcrobotEnv(EnvModel):
    name = "acrobot"
    state_dim = 6
    action_kind = "discrete"
    action_dim = 3
    max_episode_steps = 500
    state_low = np.array([-1.0, -1.0, -1.0, -1.0, -MAX_VEL_1, -MAX_VEL_2])
    state_high = np.array([1.0, 1.0, 1.0, 1.0, MAX_VEL_1, MAX_VEL_2])

    def __init__(self, seed: int = 0, rng_stream: tuple[int, ...] = (901,)):
        super().__init__(seed, rng_stream)
        self._angles = np.zeros(4)

    def _obs(self) -> np.ndarray:
        t1, t2, dt1, dt2 = self._angles
        return np.array([math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2), dt1, dt2])

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        self._angles = rng.uniform(-0.1, 0.1, size=4)
        return self._obs()

    def _dynamics(self, action):
        torque = TORQUES[action]
        ns = _rk4_step(self._angles, torque, DT)
        ns[0] = _wrap(float(ns[0]), -math.pi, math.pi)
        ns[1] = _wrap(float(ns[1]), -math.pi, math.pi)
        ns[2] = min(max(float(ns[2]), -MAX_VEL_1), MAX_VEL_1)
        ns[3] = min(max(float(ns[3]), -MAX_VEL_2), MAX_VEL_2)
        self._angles = ns
        terminated = -math.cos(ns[0]) - math.cos(ns[1] + ns[0]) > 1.0
        reward = 0.0 if terminated else -1.0
        return self._obs(), reward, terminated
