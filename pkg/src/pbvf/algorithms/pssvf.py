"""Episodic actor-critic on the parameter-only value surface V(theta).

Per episode: perturb theta, roll the perturbed policy out once, store
(theta_tilde, undiscounted return), then take a burst of Monte Carlo critic
updates followed by gradient-ascent actor updates through the critic.
"""

from __future__ import annotations

import numpy as np

from ..critics import actor_grad_pssvf, critic_init, mc_update
from ..harness.config import RunConfig
from ..numerics import DTYPE, gaussian_sample
from ..replay import EpisodeRecord, ReplayBuffer
from .common import RunResult, init_run, rollout_episode


def run_pssvf(cfg: RunConfig) -> RunResult:
    st = init_run(cfg)
    tdim = st.policy.theta.size
    critic = critic_init("pssvf", 0, 0, tdim, cfg.lr_critic, st.rng.substream(2),
                         hidden=cfg.critic_hidden, activation=cfg.critic_activation)
    buffer = ReplayBuffer(cfg.buffer_capacity)

    track_lqr = cfg.env == "lqr" and cfg.arch == "lin"
    theta_path = [st.policy.theta.copy()] if track_lqr else None
    tilde_log = [] if track_lqr else None

    env_steps = 0
    episodes = 0
    while env_steps < cfg.steps:
        eps = gaussian_sample(st.perturb_rng, tdim, cfg.sigma)
        behave = st.policy.with_theta(st.policy.theta + eps)
        ret, steps, _ = rollout_episode(st.env, behave, st.normalizer,
                                        update_normalizer=True,
                                        action_rng=st.action_rng)
        buffer.push(EpisodeRecord(behave.theta, ret, steps))
        env_steps += steps
        episodes += 1

        for _ in range(cfg.critic_updates):
            batch = buffer.sample(st.sample_rng, cfg.batch_size)
            thetas = np.stack([r.theta_tilde for r in batch])
            rets = np.array([r.episodic_return for r in batch], dtype=DTYPE)
            mc_update(critic, thetas, rets)
        for _ in range(cfg.actor_updates):
            g = actor_grad_pssvf(critic, st.policy.theta)
            st.policy.theta += cfg.lr_actor * g

        if track_lqr:
            theta_path.append(st.policy.theta.copy())
            tilde_log.append(behave.theta.copy())
        st.recorder.maybe_eval(env_steps, st.policy)

    st.recorder.finish(env_steps, st.policy)
    extras = {}
    if track_lqr:
        extras["theta_path"] = np.stack(theta_path)
        extras["theta_tilde_log"] = np.stack(tilde_log)
    return RunResult(st.recorder.curve, st.policy, critic, st.normalizer,
                     env_steps, episodes, extras)
