"""Shared training-loop plumbing: rollouts, evaluation, checkpoint schedule.

Substream layout for a run seed (fixed so results never depend on scheduling):

  (1,) policy init      (2,) critic init      (3,) perturbation noise
  (4,) buffer sampling   (5,) gaussian action sampling
  (6,) search directions (7, k) zero-shot policy k
  (8,) bootstrap action sampling

Environments draw their reset streams from (901,) for training instances and
(902,) for evaluation instances of the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..envs import EnvModel, make_env
from ..errors import ConfigError
from ..harness.config import RunConfig
from ..harness.normalizer import RunningNormalizer, normalizer_update_apply
from ..numerics import SeededRng
from ..policies import PolicyParams, act, sample_action
from ..replay import TransitionRecord


@dataclass
class EvalPoint:
    env_steps: int
    mean_return: float
    std_return: float


@dataclass
class RunResult:
    curve: list[EvalPoint]
    policy: PolicyParams
    critic: object | None
    normalizer: RunningNormalizer | None
    env_steps: int
    episodes: int
    extras: dict = field(default_factory=dict)


def head_for(env: EnvModel, stochastic: bool) -> str:
    if env.action_kind == "discrete":
        if stochastic:
            raise ConfigError("no categorical head: discrete tasks are deterministic")
        return "det_discrete"
    if stochastic:
        return "gaussian"
    if env.name == "lqr":
        return "det_unsquashed"
    return "det_continuous"


def policy_action_dim(env: EnvModel) -> int:
    return env.action_dim


def norm_apply(normalizer: RunningNormalizer | None, s: np.ndarray) -> np.ndarray:
    return s if normalizer is None else normalizer.apply(s)


def rollout_episode(env: EnvModel, policy: PolicyParams,
                    normalizer: RunningNormalizer | None = None,
                    update_normalizer: bool = False,
                    action_rng: SeededRng | None = None,
                    collect: bool = False):
    """One full episode under `policy`.

    Returns (undiscounted_return, steps, records). With `collect`, records
    hold raw (unnormalized) states; for a gaussian policy the stored action
    is the pre-squash draw u together with its behavioral log density, and
    the squashed value is what the environment executes. The stored done flag
    marks natural termination only, so a step-limit cut keeps bootstrapping.
    """
    records: list[TransitionRecord] = [] if collect else None
    s_raw = env.reset()
    total = 0.0
    steps = 0
    while True:
        if normalizer is not None:
            s_in = normalizer_update_apply(normalizer, s_raw) if update_normalizer \
                else normalizer.apply(s_raw)
        else:
            s_in = s_raw
        if policy.head == "gaussian" and action_rng is not None:
            a_exec, u, logp = sample_action(policy, s_in, action_rng)
            stored_action, logp_b = u, logp
        else:
            a_exec = act(policy, s_in)
            stored_action, logp_b = a_exec, None
        res = env.step(a_exec)
        total += res.reward
        steps += 1
        if collect:
            records.append(TransitionRecord(
                state=s_raw, action=stored_action, theta_tilde=policy.theta,
                reward=res.reward, next_state=res.state, done=res.terminated,
                logp_behavior=logp_b))
        s_raw = res.state
        if res.done:
            return total, steps, records


def evaluate_policy(env: EnvModel, policy: PolicyParams, episodes: int,
                    normalizer: RunningNormalizer | None = None) -> tuple[float, float]:
    """Deterministic evaluation: gaussian heads act at their mean, stats are
    applied frozen. Returns (mean, population std) over episode returns."""
    rets = []
    for _ in range(episodes):
        ret, _, _ = rollout_episode(env, policy, normalizer, update_normalizer=False,
                                    action_rng=None, collect=False)
        rets.append(ret)
    arr = np.asarray(rets)
    return float(arr.mean()), float(arr.std())


class EvalRecorder:
    """Emits up to n_evals checkpoints at multiples of steps_total//n_evals.

    Evaluation happens at the first episode boundary at or after each
    checkpoint; if one boundary crosses several checkpoints they share that
    boundary's snapshot, each recorded at its scheduled step count."""

    def __init__(self, eval_env: EnvModel, episodes: int, total_steps: int,
                 n_evals: int, normalizer: RunningNormalizer | None):
        self.eval_env = eval_env
        self.episodes = episodes
        self.normalizer = normalizer
        stride = max(1, total_steps // n_evals)
        self.checkpoints = [k * stride for k in range(1, n_evals + 1)]
        self.next_idx = 0
        self.curve: list[EvalPoint] = []

    def maybe_eval(self, env_steps: int, policy: PolicyParams) -> None:
        if self.next_idx >= len(self.checkpoints):
            return
        if env_steps < self.checkpoints[self.next_idx]:
            return
        mean, std = evaluate_policy(self.eval_env, policy, self.episodes, self.normalizer)
        while (self.next_idx < len(self.checkpoints)
               and env_steps >= self.checkpoints[self.next_idx]):
            self.curve.append(EvalPoint(self.checkpoints[self.next_idx], mean, std))
            self.next_idx += 1

    def finish(self, env_steps: int, policy: PolicyParams) -> None:
        """Emit any checkpoints still pending at the end of training."""
        if self.next_idx < len(self.checkpoints):
            self.maybe_eval(max(env_steps, self.checkpoints[-1]), policy)


@dataclass
class RunState:
    """Everything a training loop needs, assembled once from the config."""

    cfg: RunConfig
    rng: SeededRng
    env: EnvModel
    eval_env: EnvModel
    policy: PolicyParams
    normalizer: RunningNormalizer | None
    recorder: EvalRecorder
    perturb_rng: SeededRng
    sample_rng: SeededRng
    action_rng: SeededRng
    boot_rng: SeededRng


def init_run(cfg: RunConfig, head_override: str | None = None,
             init_scheme: str = "reference_default") -> RunState:
    from ..harness.config import LQR_START

    rng = SeededRng(cfg.seed)
    env = make_env(cfg.env, cfg.seed, role="train")
    eval_env = make_env(cfg.env, cfg.seed, role="eval")
    head = head_override or head_for(env, cfg.stochastic)
    from ..policies import policy_init

    policy = policy_init(cfg.arch, head, env.state_dim, policy_action_dim(env),
                         rng.substream(1), scheme=init_scheme)
    if cfg.env == "lqr" and cfg.arch == "lin" and init_scheme == "reference_default" \
            and head != "gaussian" \
            and cfg.algo in ("pssvf", "psvf", "pavf", "pavf-biased", "pavf-stoch"):
        policy.theta[...] = np.array(LQR_START)
    normalizer = RunningNormalizer(env.state_dim) if cfg.obs_normalization else None
    recorder = EvalRecorder(eval_env, cfg.eval_episodes, cfg.steps, cfg.n_evals,
                            normalizer)
    return RunState(cfg, rng, env, eval_env, policy, normalizer, recorder,
                    perturb_rng=rng.substream(3), sample_rng=rng.substream(4),
                    action_rng=rng.substream(5), boot_rng=rng.substream(8))
