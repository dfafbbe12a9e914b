"""Training loops, search baseline, offline experiments, and exact oracles."""

from ..errors import ConfigError
from .ars import run_ars
from .common import EvalPoint, RunResult, evaluate_policy, head_for, rollout_episode
from .pavf import run_pavf, run_pavf_stochastic
from .pssvf import run_pssvf
from .psvf import run_psvf
from .theorem_oracle import pg_theorem_oracle, run_oracle_suite
from .zero_shot import offline_psvf_experiment, zero_shot_train

__all__ = [
    "EvalPoint", "RunResult", "evaluate_policy", "head_for", "rollout_episode",
    "run_algo", "run_ars", "run_pavf", "run_pavf_stochastic", "run_pssvf",
    "run_psvf", "pg_theorem_oracle", "run_oracle_suite", "zero_shot_train",
    "offline_psvf_experiment",
]


def run_algo(cfg) -> RunResult:
    """Dispatch a fully resolved config to its training loop."""
    if cfg.algo == "pssvf":
        return run_pssvf(cfg)
    if cfg.algo == "psvf":
        return run_psvf(cfg)
    if cfg.algo == "pavf":
        return run_pavf(cfg, mode="exact")
    if cfg.algo == "pavf-biased":
        return run_pavf(cfg, mode="biased")
    if cfg.algo == "pavf-stoch":
        return run_pavf_stochastic(cfg)
    if cfg.algo == "ars":
        return run_ars(cfg)
    if cfg.algo == "zero-shot":
        return zero_shot_train(cfg)
    if cfg.algo == "offline-psvf":
        return offline_psvf_experiment(cfg)
    raise ConfigError(f"no training loop for algo {cfg.algo!r}")
