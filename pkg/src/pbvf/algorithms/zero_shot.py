"""Policy synthesis through a frozen critic, online and offline.

zero_shot_train grows fresh policies by pure gradient ascent through a saved
critic; the environment is touched only to evaluate them. The offline
experiment builds a fragmented-behavior dataset first, fits a state-value
critic on TD error alone, and measures zero-shot policies against the best
episode the behavior ever produced.
"""

from __future__ import annotations

import numpy as np

from ..critics import (actor_grad_pavf, actor_grad_pssvf, actor_grad_psvf,
                       assemble_inputs, critic_init, load_critic, td_update)
from ..envs import make_env
from ..errors import ConfigError
from ..harness.config import RunConfig
from ..harness.normalizer import RunningNormalizer, normalizer_update_apply
from ..numerics import DTYPE, SeededRng, adam_init, adam_step, gaussian_sample
from ..policies import act, policy_init
from ..replay import ReplayBuffer, TransitionRecord
from .common import EvalPoint, RunResult, evaluate_policy, head_for


def restore_normalizer(blob: dict | None) -> RunningNormalizer | None:
    if blob is None:
        return None
    n = RunningNormalizer(len(blob["mean"]))
    n.count = int(blob["count"])
    n.mean[...] = np.array(blob["mean"], dtype=DTYPE)
    n.m2[...] = np.array(blob["m2"], dtype=DTYPE)
    return n


def normalizer_blob(n: RunningNormalizer | None) -> dict | None:
    if n is None or n.count == 0:
        return None
    return {"count": n.count, "mean": n.mean.tolist(), "m2": n.m2.tolist()}


def _grad_through_critic(critic, policy, states):
    if critic.kind == "pssvf":
        return actor_grad_pssvf(critic, policy.theta)
    if critic.kind == "psvf":
        return actor_grad_psvf(critic, states, policy.theta)
    return actor_grad_pavf(critic, states, policy, mode="exact")


def _ascend_fresh_policy(critic, arch, head, env, seed_key, lr, steps,
                         eval_every, eval_episodes, eval_env, normalizer,
                         states):
    rng = SeededRng(seed_key[0], stream=seed_key[1:])
    policy = policy_init(arch, head, env.state_dim, env.action_dim, rng)
    # A frozen relu critic extrapolates with unbounded slope outside the
    # region it was fit on; plain ascent at any fixed lr shoots past it.
    # Adam caps the per-coordinate step at roughly lr, so the policy walks
    # to the critic's ridge instead of over it.
    opt = adam_init(policy.theta.size, lr)
    curve = []
    for t in range(1, steps + 1):
        g = _grad_through_critic(critic, policy, states)
        adam_step(opt, policy.theta, -g)
        if eval_every and t % eval_every == 0:
            mean, std = evaluate_policy(eval_env, policy, eval_episodes, normalizer)
            curve.append(EvalPoint(t, mean, std))
    return policy, curve


def zero_shot_train(cfg: RunConfig) -> RunResult:
    critic, extra = load_critic(cfg.critic_path)
    if extra.get("env") is not None and extra["env"] != cfg.env:
        raise ConfigError(f"checkpoint was trained on {extra['env']!r}, "
                          f"run requests {cfg.env!r}")
    arch = extra.get("arch", cfg.arch)
    env = make_env(cfg.env, cfg.seed, role="train")
    eval_env = make_env(cfg.env, cfg.seed, role="eval")
    head = extra.get("head") or head_for(env, cfg.stochastic)
    normalizer = restore_normalizer(extra.get("normalizer"))

    states = None
    if critic.kind in ("psvf", "pavf"):
        snap = extra.get("state_snapshot")
        if snap is None:
            raise ConfigError("this critic kind conditions on states; the "
                              "checkpoint carries no state snapshot to ascend over")
        states = np.array(snap, dtype=DTYPE)

    curves = []
    finals = []
    policies = []
    for k in range(cfg.zs_policies):
        policy, curve = _ascend_fresh_policy(
            critic, arch, head, env, (cfg.seed, 7, k), cfg.lr_actor,
            cfg.zs_steps, cfg.zs_eval_every, cfg.zs_eval_episodes, eval_env,
            normalizer, states)
        curves.append(curve)
        finals.append(curve[-1].mean_return if curve else float("nan"))
        policies.append(policy)

    extras = {"curves": curves, "final_returns": finals, "policies": policies,
              "online_final_return": extra.get("online_final_return")}
    best = int(np.argmax(finals))
    return RunResult(curves[best], policies[best], critic, normalizer,
                     0, 0, extras)


def offline_psvf_experiment(cfg: RunConfig) -> RunResult:
    """Two phases: collect a fixed dataset under a policy whose perturbation
    is re-drawn every `perturb_every` steps, then fit the critic offline and
    probe it with zero-shot policies at evenly spaced checkpoints."""
    rng = SeededRng(cfg.seed)
    env = make_env(cfg.env, cfg.seed, role="train")
    eval_env = make_env(cfg.env, cfg.seed, role="eval")
    head = head_for(env, stochastic=False)
    base = policy_init(cfg.arch, head, env.state_dim, env.action_dim,
                       rng.substream(1))
    perturb_rng = rng.substream(3)
    sample_rng = rng.substream(4)
    normalizer = RunningNormalizer(env.state_dim) if cfg.obs_normalization else None

    dataset = ReplayBuffer(max(cfg.dataset_size, 1))
    episode_returns = []
    behave = base
    s_raw = env.reset()
    ep_ret = 0.0
    for step in range(cfg.dataset_size):
        if step % cfg.perturb_every == 0:
            behave = base.with_theta(
                base.theta + gaussian_sample(perturb_rng, base.theta.size, cfg.sigma))
        s_in = normalizer_update_apply(normalizer, s_raw) if normalizer is not None \
            else s_raw
        a = act(behave, s_in)
        res = env.step(a)
        dataset.push(TransitionRecord(
            state=s_raw, action=a, theta_tilde=behave.theta, reward=res.reward,
            next_state=res.state, done=res.terminated, logp_behavior=None))
        ep_ret += res.reward
        s_raw = res.state
        if res.done:
            episode_returns.append(ep_ret)
            ep_ret = 0.0
            s_raw = env.reset()
    if ep_ret != 0.0:
        episode_returns.append(ep_ret)  # trailing partial episode
    best_behavioral = max(episode_returns)

    critic = critic_init("psvf", env.state_dim, 0, base.theta.size,
                         cfg.lr_critic, rng.substream(2),
                         hidden=cfg.critic_hidden, activation=cfg.critic_activation)

    # Fixed probe batch for a comparable TD loss across checkpoints.
    probe = dataset.sample(sample_rng, min(1024, len(dataset)))

    def probe_loss():
        s = np.stack([r.state for r in probe]).astype(DTYPE)
        ns = np.stack([r.next_state for r in probe]).astype(DTYPE)
        if normalizer is not None:
            s = normalizer.apply_batch(s)
            ns = normalizer.apply_batch(ns)
        thetas = np.stack([r.theta_tilde for r in probe])
        rewards = np.array([r.reward for r in probe], dtype=DTYPE)
        live = np.array([0.0 if r.done else 1.0 for r in probe], dtype=DTYPE)
        from ..critics import predict_batch
        preds = predict_batch(critic, assemble_inputs(critic, thetas, s))
        boots = predict_batch(critic, assemble_inputs(critic, thetas, ns))
        err = preds - (rewards + cfg.gamma * live * boots)
        return float(np.mean(err * err))

    snap_idx = sample_rng.integers(0, len(dataset), size=256)
    snapshot = np.stack([dataset[int(i)].state for i in snap_idx]).astype(DTYPE)
    if normalizer is not None:
        snapshot = normalizer.apply_batch(snapshot)

    checkpoints = []
    for u in range(1, cfg.offline_updates + 1):
        batch = dataset.sample(sample_rng, cfg.batch_size)
        s = np.stack([r.state for r in batch]).astype(DTYPE)
        ns = np.stack([r.next_state for r in batch]).astype(DTYPE)
        if normalizer is not None:
            s = normalizer.apply_batch(s)
            ns = normalizer.apply_batch(ns)
        thetas = np.stack([r.theta_tilde for r in batch])
        rewards = np.array([r.reward for r in batch], dtype=DTYPE)
        dones = np.array([1.0 if r.done else 0.0 for r in batch], dtype=DTYPE)
        td_update(critic, assemble_inputs(critic, thetas, s), rewards, dones,
                  assemble_inputs(critic, thetas, ns), cfg.gamma, cfg.semi_gradient)
        if u % cfg.checkpoint_every == 0 or u == cfg.offline_updates:
            finals = []
            for k in range(cfg.zs_policies):
                policy, curve = _ascend_fresh_policy(
                    critic, cfg.arch, head, env, (cfg.seed, 7, u, k),
                    cfg.lr_actor, cfg.zs_steps, cfg.zs_eval_every,
                    cfg.zs_eval_episodes, eval_env, normalizer, snapshot)
                finals.append(curve[-1].mean_return if curve else float("nan"))
            checkpoints.append({"updates": u, "td_loss": probe_loss(),
                                "returns": finals})

    best_zero_shot = max(max(c["returns"]) for c in checkpoints)
    curve = [EvalPoint(c["updates"], float(np.mean(c["returns"])),
                       float(np.std(c["returns"]))) for c in checkpoints]
    extras = {"best_behavioral": best_behavioral,
              "best_zero_shot": best_zero_shot,
              "checkpoints": checkpoints,
              "episode_returns": episode_returns,
              "state_snapshot": snapshot}
    return RunResult(curve, base, critic, normalizer, cfg.dataset_size,
                     len(episode_returns), extras)
