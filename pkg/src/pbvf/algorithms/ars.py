"""Random-search baseline with elite directions and return standardization.

Each iteration draws N unit-variance direction vectors, rolls out the policy
at theta +/- sigma*delta, keeps the n_elite directions ranked by
max(r+, r-), and takes a plain SGD step on the elite return differences
scaled by the elite-return standard deviation (skipped when that std is 0).
"""

from __future__ import annotations

import numpy as np

from ..harness.config import RunConfig
from .common import RunResult, init_run, rollout_episode


def ars_update(theta: np.ndarray, deltas: np.ndarray, r_plus: np.ndarray,
               r_minus: np.ndarray, alpha: float, n_elite: int) -> np.ndarray:
    """One parameter update from a completed population of direction returns.
    Pure function of its inputs so the update rule is testable in isolation."""
    scores = np.maximum(r_plus, r_minus)
    order = np.argsort(-scores, kind="stable")[:n_elite]
    elite = np.concatenate([r_plus[order], r_minus[order]])
    sigma_r = float(elite.std())
    if sigma_r == 0.0:
        sigma_r = 1.0
    step = ((r_plus[order] - r_minus[order])[:, None] * deltas[order]).sum(axis=0)
    return theta + (alpha / (n_elite * sigma_r)) * step


def run_ars(cfg: RunConfig) -> RunResult:
    st = init_run(cfg, init_scheme="zeros")
    tdim = st.policy.theta.size
    dirs_rng = st.rng.substream(6)

    env_steps = 0
    iterations = 0
    while env_steps < cfg.steps:
        deltas = dirs_rng.normal(size=(cfg.n_directions, tdim))
        r_plus = np.empty(cfg.n_directions)
        r_minus = np.empty(cfg.n_directions)
        for i in range(cfg.n_directions):
            for sign, sink in ((1.0, r_plus), (-1.0, r_minus)):
                probe = st.policy.with_theta(
                    st.policy.theta + sign * cfg.sigma * deltas[i])
                ret, steps, _ = rollout_episode(st.env, probe, st.normalizer,
                                                update_normalizer=True)
                sink[i] = ret
                env_steps += steps
        st.policy.theta[...] = ars_update(st.policy.theta, deltas, r_plus,
                                          r_minus, cfg.lr_actor, cfg.n_elite)
        iterations += 1
        st.recorder.maybe_eval(env_steps, st.policy)

    st.recorder.finish(env_steps, st.policy)
    return RunResult(st.recorder.curve, st.policy, None, st.normalizer,
                     env_steps, iterations, {})
