"""Value-surface dump over the 2-parameter regulator policy grid.

Every linear policy (w, b) on a square grid over [-5, 5]^2 is rolled out once
(deterministic task, so one rollout is exact) next to the critic's prediction
for the same parameters. Modes differ in what "true value" means: the
episodic surface is the undiscounted 50-step return the episodic critic
regresses on, the discounted surface is a 500-step gamma=0.99 return matching
what the bootstrapped critics estimate from the start state.
"""

from __future__ import annotations

import numpy as np

from ..critics import PbvfCritic, assemble_inputs, predict_batch
from ..envs.lqr import HORIZON, START_STATE, STATE_CLIP
from ..errors import ConfigError
from ..numerics import DTYPE

GRID_LOW, GRID_HIGH = -5.0, 5.0
DISCOUNTED_HORIZON = 500
DISCOUNT = 0.99


def grid_axes(resolution: int) -> np.ndarray:
    if resolution < 2:
        raise ConfigError(f"grid resolution must be >= 2, got {resolution}")
    return np.linspace(GRID_LOW, GRID_HIGH, resolution)


def grid_thetas(resolution: int) -> np.ndarray:
    """Row-major (w slow, b fast) flat list of grid parameter pairs."""
    axis = grid_axes(resolution)
    ws, bs = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([ws.ravel(), bs.ravel()], axis=1)


def true_returns(thetas: np.ndarray, mode: str) -> np.ndarray:
    """Exact returns of linear policies a = w*s + b, all rolled out at once."""
    if mode == "episodic":
        horizon, gamma = HORIZON, 1.0
    elif mode == "discounted":
        horizon, gamma = DISCOUNTED_HORIZON, DISCOUNT
    else:
        raise ConfigError(f"unknown landscape mode {mode!r}")
    w = np.asarray(thetas, dtype=DTYPE)[:, 0]
    b = np.asarray(thetas, dtype=DTYPE)[:, 1]
    s = np.full(w.shape, START_STATE, dtype=DTYPE)
    total = np.zeros(w.shape, dtype=DTYPE)
    disc = 1.0
    for _ in range(horizon):
        a = w * s + b
        total += disc * -(s * s + a * a)
        s = np.clip(s + a, -STATE_CLIP, STATE_CLIP)
        disc *= gamma
    return total


def predicted_values(critic: PbvfCritic, thetas: np.ndarray) -> np.ndarray:
    """Critic estimate at each grid policy; state-conditioned kinds are read
    at the task's fixed start state, action-conditioned at the policy's own
    first action."""
    thetas = np.asarray(thetas, dtype=DTYPE)
    if critic.theta_dim != 2:
        raise ConfigError("landscape needs a critic over 2-parameter policies")
    if critic.kind == "pssvf":
        x = assemble_inputs(critic, thetas)
    else:
        s0 = np.full((thetas.shape[0], 1), START_STATE, dtype=DTYPE)
        if critic.kind == "psvf":
            x = assemble_inputs(critic, thetas, s0)
        else:
            a0 = (thetas[:, 0] * START_STATE + thetas[:, 1])[:, None]
            x = assemble_inputs(critic, thetas, s0, a0)
    return predict_batch(critic, x)


def landscape_table(critic: PbvfCritic | None, resolution: int, mode: str):
    """Returns (thetas, true_J, predicted_V); predictions are NaN without a
    critic so the true surface can be dumped on its own."""
    thetas = grid_thetas(resolution)
    true_j = true_returns(thetas, mode)
    if critic is None:
        pred = np.full(thetas.shape[0], np.nan)
    else:
        pred = predicted_values(critic, thetas)
    return thetas, true_j, pred


def mode_for_critic_kind(kind: str) -> str:
    return "episodic" if kind == "pssvf" else "discounted"
