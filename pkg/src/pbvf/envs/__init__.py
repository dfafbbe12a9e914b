"""Environment registry."""

from __future__ import annotations

from ..errors import ConfigError
from .acrobot import AcrobotEnv
from .base import EnvModel, StepResult
from .cartpole import CartPoleEnv
from .finite_mdp import (
    FiniteMdp,
    FiniteMdpEnv,
    chain2_mdp,
    exact_q_values,
    exact_state_values,
    exact_stationary_distribution,
)
from .lqr import LqrEnv
from .mountain_car import MountainCarContinuousEnv

ENV_NAMES = ("lqr", "cartpole", "mountaincar-cont", "acrobot", "chain2")

# Train and eval instances of the same run use disjoint reset streams.
_ROLE_STREAMS = {"train": (901,), "eval": (902,)}


def make_env(name: str, seed: int = 0, role: str = "train") -> EnvModel:
    stream = _ROLE_STREAMS.get(role)
    if stream is None:
        raise ConfigError(f"unknown env role {role!r}")
    if name == "lqr":
        return LqrEnv(seed, stream)
    if name == "cartpole":
        return CartPoleEnv(seed, stream)
    if name == "mountaincar-cont":
        return MountainCarContinuousEnv(seed, stream)
    if name == "acrobot":
        return AcrobotEnv(seed, stream)
    if name == "chain2":
        return FiniteMdpEnv(chain2_mdp(), seed, name="chain2", rng_stream=stream)
    raise ConfigError(f"unknown env {name!r}; known: {', '.join(ENV_NAMES)}")


__all__ = [
    "AcrobotEnv",
    "CartPoleEnv",
    "EnvModel",
    "ENV_NAMES",
    "FiniteMdp",
    "FiniteMdpEnv",
    "LqrEnv",
    "MountainCarContinuousEnv",
    "StepResult",
    "chain2_mdp",
    "exact_q_values",
    "exact_state_values",
    "exact_stationary_distribution",
    "make_env",
]
