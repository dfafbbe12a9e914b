"""TD actor-critic on the state-conditioned parameter value surface V(s, theta).

Data collection runs under a perturbed policy re-drawn each episode; every
`update_every` env steps the critic takes a burst of bootstrapped updates and
the actor ascends mean_s V(s, theta) over a replayed state batch.
"""

from __future__ import annotations

import numpy as np

from ..critics import actor_grad_psvf, assemble_inputs, critic_init, td_update
from ..harness.config import RunConfig
from ..harness.normalizer import normalizer_update_apply
from ..numerics import DTYPE, adam_init, adam_step, gaussian_sample
from ..policies import act, sample_action
from ..replay import ReplayBuffer, TransitionRecord
from .common import RunResult, init_run


def _batch_arrays(batch, normalizer):
    s = np.stack([r.state for r in batch]).astype(DTYPE)
    ns = np.stack([r.next_state for r in batch]).astype(DTYPE)
    if normalizer is not None:
        s = normalizer.apply_batch(s)
        ns = normalizer.apply_batch(ns)
    thetas = np.stack([r.theta_tilde for r in batch])
    rewards = np.array([r.reward for r in batch], dtype=DTYPE)
    dones = np.array([1.0 if r.done else 0.0 for r in batch], dtype=DTYPE)
    return s, ns, thetas, rewards, dones


def _psvf_update(cfg, st, critic, buffer, actor_adam):
    for _ in range(cfg.critic_updates):
        batch = buffer.sample(st.sample_rng, cfg.batch_size)
        s, ns, thetas, rewards, dones = _batch_arrays(batch, st.normalizer)
        inputs = assemble_inputs(critic, thetas, s)
        next_inputs = assemble_inputs(critic, thetas, ns)
        td_update(critic, inputs, rewards, dones, next_inputs, cfg.gamma,
                  cfg.semi_gradient)
    for _ in range(cfg.actor_updates):
        batch = buffer.sample(st.sample_rng, cfg.batch_size)
        s = np.stack([r.state for r in batch]).astype(DTYPE)
        if st.normalizer is not None:
            s = st.normalizer.apply_batch(s)
        g = actor_grad_psvf(critic, s, st.policy.theta)
        # Bootstrapped critics sit on the discounted-return scale, so raw
        # slopes can be thousands; Adam keeps the actor step near lr_actor
        # regardless, where a plain step at the same lr overshoots and the
        # policy chases the critic's own extrapolation artifacts.
        adam_step(actor_adam, st.policy.theta, -g)


def run_psvf(cfg: RunConfig) -> RunResult:
    st = init_run(cfg)
    tdim = st.policy.theta.size
    critic = critic_init("psvf", st.env.state_dim, 0, tdim, cfg.lr_critic,
                         st.rng.substream(2), hidden=cfg.critic_hidden,
                         activation=cfg.critic_activation)
    actor_adam = adam_init(tdim, cfg.lr_actor)
    buffer = ReplayBuffer(cfg.buffer_capacity)

    track_lqr = cfg.env == "lqr" and cfg.arch == "lin"
    theta_path = [st.policy.theta.copy()] if track_lqr else None

    env_steps = 0
    episodes = 0
    while env_steps < cfg.steps:
        behave = st.policy.with_theta(
            st.policy.theta + gaussian_sample(st.perturb_rng, tdim, cfg.sigma))
        s_raw = st.env.reset()
        while True:
            if st.normalizer is not None:
                s_in = normalizer_update_apply(st.normalizer, s_raw)
            else:
                s_in = s_raw
            if behave.head == "gaussian":
                a_exec, u, logp = sample_action(behave, s_in, st.action_rng)
                stored, logp_b = u, logp
            else:
                a_exec = act(behave, s_in)
                stored, logp_b = a_exec, None
            res = st.env.step(a_exec)
            buffer.push(TransitionRecord(
                state=s_raw, action=stored, theta_tilde=behave.theta,
                reward=res.reward, next_state=res.state, done=res.terminated,
                logp_behavior=logp_b))
            env_steps += 1
            s_raw = res.state
            if env_steps % cfg.update_every == 0:
                _psvf_update(cfg, st, critic, buffer, actor_adam)
            if res.done:
                break
        episodes += 1
        if track_lqr:
            theta_path.append(st.policy.theta.copy())
        st.recorder.maybe_eval(env_steps, st.policy)

    st.recorder.finish(env_steps, st.policy)
    extras = {"buffer": buffer}
    if track_lqr:
        extras["theta_path"] = np.stack(theta_path)
    return RunResult(st.recorder.curve, st.policy, critic, st.normalizer,
                     env_steps, episodes, extras)
