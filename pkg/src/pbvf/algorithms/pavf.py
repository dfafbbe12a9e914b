"""TD actor-critic on the action-conditioned parameter surface Q(s, a, theta).

Deterministic variant bootstraps with the stored perturbed policy's own
action at the next state; the actor ascends mean_s Q(s, pi_theta(s), theta)
through both the action path and the direct theta path (the biased mode keeps
only the action path). The stochastic variant stores pre-squash gaussian
draws with their log densities and reweights updates by importance ratios.
"""

from __future__ import annotations

import numpy as np

from ..critics import (actor_grad_pavf, actor_grad_pavf_stochastic,
                       assemble_inputs, critic_init, td_update)
from ..errors import ConfigError
from ..harness.config import RunConfig
from ..harness.normalizer import normalizer_update_apply
from ..numerics import DTYPE, adam_init, adam_step, gaussian_sample
from ..policies import act, sample_action
from ..replay import ReplayBuffer, TransitionRecord
from .common import RunResult, init_run


def _bootstrap_actions(policy, thetas, next_states, boot_rng):
    """Next-state actions from each record's own behavioral parameters.
    Deterministic heads act greedily; the gaussian head samples a fresh
    pre-squash draw, matching the critic's pre-squash action convention."""
    out = np.empty((next_states.shape[0], policy.action_dim), dtype=DTYPE)
    for i in range(next_states.shape[0]):
        p = policy.with_theta(thetas[i])
        if policy.head == "gaussian":
            _, u, _ = sample_action(p, next_states[i], boot_rng)
            out[i] = u
        else:
            out[i] = act(p, next_states[i])
    return out


def _pavf_update(cfg, st, critic, buffer, mode, actor_adam):
    stochastic = st.policy.head == "gaussian"
    for _ in range(cfg.critic_updates):
        batch = buffer.sample(st.sample_rng, cfg.batch_size)
        s = np.stack([r.state for r in batch]).astype(DTYPE)
        ns = np.stack([r.next_state for r in batch]).astype(DTYPE)
        if st.normalizer is not None:
            s = st.normalizer.apply_batch(s)
            ns = st.normalizer.apply_batch(ns)
        thetas = np.stack([r.theta_tilde for r in batch])
        actions = np.stack([np.atleast_1d(r.action) for r in batch]).astype(DTYPE)
        rewards = np.array([r.reward for r in batch], dtype=DTYPE)
        dones = np.array([1.0 if r.done else 0.0 for r in batch], dtype=DTYPE)
        boot_a = _bootstrap_actions(st.policy, thetas, ns, st.boot_rng)
        inputs = assemble_inputs(critic, thetas, s, actions)
        next_inputs = assemble_inputs(critic, thetas, ns, boot_a)
        td_update(critic, inputs, rewards, dones, next_inputs, cfg.gamma,
                  cfg.semi_gradient)
    for _ in range(cfg.actor_updates):
        batch = buffer.sample(st.sample_rng, cfg.batch_size)
        s = np.stack([r.state for r in batch]).astype(DTYPE)
        if st.normalizer is not None:
            s = st.normalizer.apply_batch(s)
        if stochastic:
            us = np.stack([np.atleast_1d(r.action) for r in batch]).astype(DTYPE)
            logps = np.array([r.logp_behavior for r in batch], dtype=DTYPE)
            g = actor_grad_pavf_stochastic(critic, s, us, logps, st.policy)
        else:
            g = actor_grad_pavf(critic, s, st.policy, mode=mode)
        # Same reasoning as the state-value loop: the critic's scale is the
        # discounted return, so the actor needs Adam's step bound.
        adam_step(actor_adam, st.policy.theta, -g)


def _run_q_loop(cfg: RunConfig, mode: str, head_override: str | None) -> RunResult:
    st = init_run(cfg, head_override=head_override)
    tdim = st.policy.theta.size
    critic = critic_init("pavf", st.env.state_dim, st.env.action_dim, tdim,
                         cfg.lr_critic, st.rng.substream(2),
                         hidden=cfg.critic_hidden, activation=cfg.critic_activation)
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
                _pavf_update(cfg, st, critic, buffer, mode, actor_adam)
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


def run_pavf(cfg: RunConfig, mode: str = "exact") -> RunResult:
    if mode not in ("exact", "biased"):
        raise ConfigError(f"unknown pavf mode {mode!r}")
    return _run_q_loop(cfg, mode, head_override=None)


def run_pavf_stochastic(cfg: RunConfig) -> RunResult:
    return _run_q_loop(cfg, mode="exact", head_override="gaussian")
