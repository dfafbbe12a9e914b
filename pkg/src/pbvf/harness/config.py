"""Run configuration: parsing, tuned defaults, and grid validation.

Precedence is defaults < config file < explicit flags. Learning rates, noise
scales and direction counts must come from the documented search grids unless
`force` is set; values filled in from the tuned tables are pre-validated by
construction. The tables index by (algo, env, arch, metric) where metric
picks which selection criterion the tuned values optimized ("final" = mean
return over the last fifth of evaluations, "avg" = mean over all of them).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from ..envs import ENV_NAMES
from ..errors import ConfigError
from ..policies import ARCHS

ALGOS = ("pssvf", "psvf", "pavf", "pavf-biased", "pavf-stoch", "ars",
         "zero-shot", "offline-psvf", "pg-oracle")

DEFAULT_CRITIC_HIDDEN = (512, 512)

LR_GRID = (1e-2, 1e-3, 1e-4)
SIGMA_GRID = (1.0, 1e-1)
SIGMA_GRID_STOCHASTIC = (1.0, 1e-1, 0.0)
SIGMA_GRID_ARS = (1.0, 1e-1, 1e-2, 1e-3)
DIRECTIONS_GRID = ((1, 1), (4, 1), (4, 4), (16, 1), (16, 4), (16, 16))

# (lr_actor, lr_critic, sigma) per (algo, env, arch, metric).
TUNED: dict[tuple[str, str, str, str], tuple[float, float, float]] = {
    ("pssvf", "acrobot", "lin", "final"): (1e-3, 1e-3, 1.0),
    ("pssvf", "mountaincar-cont", "lin", "final"): (1e-3, 1e-2, 1.0),
    ("pssvf", "cartpole", "lin", "final"): (1e-3, 1e-2, 1.0),
    ("pssvf", "acrobot", "mlp32", "final"): (1e-4, 1e-2, 1e-1),
    ("pssvf", "mountaincar-cont", "mlp32", "final"): (1e-4, 1e-2, 1e-1),
    ("pssvf", "cartpole", "mlp32", "final"): (1e-3, 1e-3, 1.0),
    ("pssvf", "acrobot", "mlp64x64", "final"): (1e-4, 1e-2, 1e-1),
    ("pssvf", "mountaincar-cont", "mlp64x64", "final"): (1e-4, 1e-2, 1e-1),
    ("pssvf", "cartpole", "mlp64x64", "final"): (1e-4, 1e-2, 1e-1),
    ("pssvf", "acrobot", "lin", "avg"): (1e-2, 1e-2, 1.0),
    ("pssvf", "mountaincar-cont", "lin", "avg"): (1e-2, 1e-3, 1.0),
    ("pssvf", "cartpole", "lin", "avg"): (1e-3, 1e-2, 1.0),
    ("psvf", "acrobot", "lin", "final"): (1e-2, 1e-4, 1.0),
    ("psvf", "mountaincar-cont", "lin", "final"): (1e-3, 1e-3, 1e-1),
    ("psvf", "cartpole", "lin", "final"): (1e-2, 1e-2, 1.0),
    ("psvf", "acrobot", "mlp32", "final"): (1e-4, 1e-2, 1e-1),
    ("psvf", "mountaincar-cont", "mlp32", "final"): (1e-4, 1e-4, 1.0),
    ("psvf", "cartpole", "mlp32", "final"): (1e-4, 1e-3, 1e-1),
    ("psvf", "acrobot", "mlp64x64", "final"): (1e-2, 1e-2, 1e-1),
    ("psvf", "mountaincar-cont", "mlp64x64", "final"): (1e-4, 1e-3, 1e-1),
    ("psvf", "cartpole", "mlp64x64", "final"): (1e-4, 1e-4, 1e-1),
    ("psvf", "acrobot", "lin", "avg"): (1e-2, 1e-3, 1.0),
    ("psvf", "mountaincar-cont", "lin", "avg"): (1e-2, 1e-4, 1.0),
    ("psvf", "cartpole", "lin", "avg"): (1e-2, 1e-2, 1.0),
    ("pavf", "mountaincar-cont", "lin", "final"): (1e-3, 1e-4, 1e-1),
    ("pavf", "mountaincar-cont", "mlp32", "final"): (1e-4, 1e-3, 1e-1),
    ("pavf", "mountaincar-cont", "mlp64x64", "final"): (1e-4, 1e-3, 1e-1),
    ("pavf", "mountaincar-cont", "lin", "avg"): (1e-2, 1e-4, 1.0),
    ("pavf", "mountaincar-cont", "mlp32", "avg"): (1e-3, 1e-4, 1e-1),
    ("pavf", "mountaincar-cont", "mlp64x64", "avg"): (1e-4, 1e-4, 1e-1),
}

# Gaussian-head variants were tuned on the continuous task only.
TUNED_STOCHASTIC: dict[tuple[str, str], tuple[float, float, float]] = {
    ("pssvf", "mountaincar-cont"): (1e-2, 1e-2, 1.0),
    ("psvf", "mountaincar-cont"): (1e-2, 1e-3, 1.0),
}

# (lr, n_directions, n_elite, sigma) per (env, arch, metric).
TUNED_ARS: dict[tuple[str, str, str], tuple[float, int, int, float]] = {
    ("acrobot", "lin", "final"): (1e-3, 4, 4, 1e-3),
    ("mountaincar-cont", "lin", "final"): (1e-2, 1, 1, 1e-1),
    ("cartpole", "lin", "final"): (1e-2, 4, 4, 1e-2),
    ("acrobot", "mlp32", "final"): (1e-2, 1, 1, 1e-1),
    ("mountaincar-cont", "mlp32", "final"): (1e-2, 16, 4, 1e-1),
    ("cartpole", "mlp32", "final"): (1e-2, 1, 1, 1e-1),
    ("acrobot", "mlp64x64", "final"): (1e-2, 1, 1, 1e-1),
    ("mountaincar-cont", "mlp64x64", "final"): (1e-2, 1, 1, 1e-1),
    ("cartpole", "mlp64x64", "final"): (1e-2, 4, 1, 1e-2),
    ("acrobot", "lin", "avg"): (1e-2, 4, 4, 1e-2),
    ("mountaincar-cont", "lin", "avg"): (1e-2, 1, 1, 1e-1),
    ("cartpole", "lin", "avg"): (1e-2, 4, 4, 1e-2),
}

# Fixed-task presets (the 1-D regulator study): learning rates and noise
# outside the shared grids, a shallow tanh critic for the bootstrapped
# variants, and a fixed far-from-optimal policy start.
LQR_START = (3.2, -3.5)
LQR_PRESETS = {
    "pssvf": dict(lr_actor=1e-3, lr_critic=1e-2, sigma=0.5, batch_size=16,
                  critic_updates=10, actor_updates=10),
    "psvf": dict(lr_actor=1e-2, lr_critic=1e-1, sigma=0.5, batch_size=128,
                 update_every=10, critic_updates=10, actor_updates=2,
                 critic_hidden=(64,), critic_activation="tanh"),
    "pavf": dict(lr_actor=1e-2, lr_critic=1e-1, sigma=0.5, batch_size=128,
                 update_every=10, critic_updates=10, actor_updates=2,
                 critic_hidden=(64,), critic_activation="tanh"),
}
LQR_PRESETS["pavf-biased"] = LQR_PRESETS["pavf"]
LQR_PRESETS["pavf-stoch"] = LQR_PRESETS["pavf"]

ZERO_SHOT_DEFAULT_LR = 0.05
OFFLINE_ZERO_SHOT_LR = 0.02


@dataclass
class RunConfig:
    algo: str
    env: str
    arch: str = "lin"
    stochastic: bool = False
    seed: int = 0
    steps: int | None = None
    lr_actor: float | None = None
    lr_critic: float | None = None
    sigma: float | None = None
    gamma: float = 0.99
    batch_size: int | None = None
    buffer_capacity: int = 100_000
    critic_updates: int | None = None
    actor_updates: int | None = None
    update_every: int | None = None
    obs_normalization: bool | None = None
    critic_hidden: tuple[int, ...] | None = None
    critic_activation: str | None = None
    semi_gradient: bool = True
    n_evals: int = 100
    eval_episodes: int = 10
    metric: str = "final"
    n_directions: int | None = None
    n_elite: int | None = None
    critic_path: str | None = None
    zs_policies: int = 5
    zs_steps: int = 200
    zs_eval_every: int = 5
    zs_eval_episodes: int = 5
    dataset_size: int = 100_000
    perturb_every: int = 200
    offline_updates: int = 6000
    checkpoint_every: int = 1500
    oracle_instances: int = 20
    force: bool = False


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_config(text: str) -> dict[str, str]:
    """Flat `key = value` file. Blank lines and # comments are skipped;
    anything else without an '=' is an error naming the line."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if not key or not value:
            raise ConfigError(f"config line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _coerce(key: str, value):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if not isinstance(value, str):
        return value
    t = _FIELD_TYPES[key]
    if "tuple" in t:
        try:
            return tuple(int(v) for v in value.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated ints, got {value!r}")
    if "bool" in t:
        low = value.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if "int" in t:
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if "float" in t:
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}")
    return value


def _close_to_any(value: float, grid) -> bool:
    return any(abs(value - g) <= 1e-12 * max(1.0, abs(g)) for g in grid)


def build_run_config(options: dict, config_text: str | None = None) -> RunConfig:
    """Merge config-file keys and explicit options onto the documented
    defaults, then validate. `options` values of None mean 'not given'."""
    provided: dict[str, object] = {}
    if config_text:
        for key, value in parse_config(config_text).items():
            provided[key] = _coerce(key, value)
    for key, value in options.items():
        if value is None:
            continue
        provided[key] = _coerce(key, value)

    if "algo" not in provided:
        raise ConfigError("missing required key: algo")
    if "env" not in provided:
        raise ConfigError("missing required key: env")

    cfg = RunConfig(algo="", env="")
    known = {f.name for f in fields(RunConfig)}
    for key, value in provided.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, value)

    if cfg.algo not in ALGOS:
        raise ConfigError(f"unknown algo {cfg.algo!r}; known: {', '.join(ALGOS)}")
    if cfg.env not in ENV_NAMES:
        raise ConfigError(f"unknown env {cfg.env!r}; known: {', '.join(ENV_NAMES)}")
    if cfg.arch not in ARCHS:
        raise ConfigError(f"unknown arch {cfg.arch!r}; known: {', '.join(ARCHS)}")
    if cfg.metric not in ("final", "avg"):
        raise ConfigError(f"metric must be 'final' or 'avg', got {cfg.metric!r}")

    return _resolve_defaults(cfg, user_keys=set(provided))


def _tuned_row(cfg: RunConfig):
    if cfg.algo == "ars":
        row = TUNED_ARS.get((cfg.env, cfg.arch, cfg.metric))
        if row is None:
            row = TUNED_ARS.get((cfg.env, cfg.arch, "final"))
        return row
    if cfg.stochastic and cfg.algo in ("pssvf", "psvf"):
        return TUNED_STOCHASTIC.get((cfg.algo, cfg.env))
    algo = "pavf" if cfg.algo in ("pavf-biased", "pavf-stoch") else cfg.algo
    row = TUNED.get((algo, cfg.env, cfg.arch, cfg.metric))
    if row is None:
        row = TUNED.get((algo, cfg.env, cfg.arch, "final"))
    return row


def _resolve_defaults(cfg: RunConfig, user_keys: set[str]) -> RunConfig:
    from ..envs import make_env  # local import to avoid cycles at import time

    env_probe = make_env(cfg.env, seed=0)
    continuous = env_probe.action_kind == "continuous"

    needs_critic = cfg.algo in ("pssvf", "psvf", "pavf", "pavf-biased", "pavf-stoch",
                                "offline-psvf")
    pbvf_like = cfg.algo in ("pssvf", "psvf", "pavf", "pavf-biased", "pavf-stoch")

    if cfg.stochastic:
        if cfg.algo not in ("pssvf", "psvf"):
            raise ConfigError(
                "the stochastic flag applies to pssvf and psvf; use algo pavf-stoch "
                "for the stochastic action-value variant")
        if not continuous:
            raise ConfigError("stochastic (gaussian) policies need a continuous "
                              "action space; this surface has no categorical head")
    if cfg.algo in ("pavf", "pavf-biased", "pavf-stoch") and not continuous:
        raise ConfigError(f"{cfg.algo} needs a continuous action space")

    # Structural defaults.
    if cfg.steps is None:
        cfg.steps = 50_000 if cfg.env == "lqr" else 100_000
    if cfg.obs_normalization is None:
        cfg.obs_normalization = env_probe.obs_normalizable
    if cfg.env == "lqr" and cfg.obs_normalization:
        raise ConfigError("the regulator task runs on raw observations")

    if cfg.env == "lqr" and cfg.algo in LQR_PRESETS:
        for key, value in LQR_PRESETS[cfg.algo].items():
            if key not in user_keys and getattr(cfg, key) is None:
                setattr(cfg, key, value)

    if pbvf_like:
        if cfg.batch_size is None:
            cfg.batch_size = 16 if cfg.algo == "pssvf" else 128
        if cfg.critic_updates is None:
            cfg.critic_updates = 10 if cfg.algo == "pssvf" else 5
        if cfg.actor_updates is None:
            cfg.actor_updates = 10 if cfg.algo == "pssvf" else 1
        if cfg.update_every is None and cfg.algo != "pssvf":
            cfg.update_every = 50
    if needs_critic:
        if cfg.critic_hidden is None:
            cfg.critic_hidden = DEFAULT_CRITIC_HIDDEN
        if cfg.critic_activation is None:
            cfg.critic_activation = "relu"

    # Learning rates / noise.
    row = _tuned_row(cfg)
    if cfg.algo == "ars":
        if row is not None:
            lr, n_dir, n_elite, sigma = row
            if cfg.lr_actor is None:
                cfg.lr_actor = lr
            if cfg.n_directions is None:
                cfg.n_directions = n_dir
            if cfg.n_elite is None:
                cfg.n_elite = n_elite
            if cfg.sigma is None:
                cfg.sigma = sigma
        for name in ("lr_actor", "sigma", "n_directions", "n_elite"):
            if getattr(cfg, name) is None:
                raise ConfigError(f"no tuned defaults for ars on {cfg.env}/{cfg.arch}; "
                                  f"pass {name} explicitly")
        if cfg.n_elite > cfg.n_directions:
            raise ConfigError("n_elite cannot exceed n_directions")
    elif pbvf_like:
        if row is not None:
            lr_a, lr_c, sigma = row
            if cfg.lr_actor is None:
                cfg.lr_actor = lr_a
            if cfg.lr_critic is None:
                cfg.lr_critic = lr_c
            if cfg.sigma is None:
                cfg.sigma = sigma
        for name in ("lr_actor", "lr_critic", "sigma"):
            if getattr(cfg, name) is None:
                raise ConfigError(
                    f"no tuned defaults for {cfg.algo} on {cfg.env}/{cfg.arch} "
                    f"(metric {cfg.metric}); pass {name} explicitly")
    elif cfg.algo == "zero-shot":
        if cfg.lr_actor is None:
            cfg.lr_actor = ZERO_SHOT_DEFAULT_LR
        if cfg.critic_path is None:
            raise ConfigError("zero-shot needs critic_path pointing at a checkpoint")
    elif cfg.algo == "offline-psvf":
        if cfg.lr_actor is None:
            cfg.lr_actor = OFFLINE_ZERO_SHOT_LR
        if cfg.lr_critic is None:
            cfg.lr_critic = 1e-3
        if cfg.sigma is None:
            cfg.sigma = 0.5
        if cfg.batch_size is None:
            cfg.batch_size = 128

    if not 0.0 <= cfg.gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {cfg.gamma}")
    if cfg.steps < cfg.n_evals:
        raise ConfigError(f"steps ({cfg.steps}) must be at least n_evals ({cfg.n_evals})")

    _validate_grids(cfg, user_keys)
    return cfg


def _validate_grids(cfg: RunConfig, user_keys: set[str]) -> None:
    if cfg.force:
        return
    if cfg.algo in ("zero-shot", "offline-psvf", "pg-oracle"):
        return
    sigma_grid = SIGMA_GRID_ARS if cfg.algo == "ars" else (
        SIGMA_GRID_STOCHASTIC if cfg.stochastic else SIGMA_GRID)
    checks = []
    if "lr_actor" in user_keys:
        checks.append(("lr_actor", cfg.lr_actor, LR_GRID))
    if "lr_critic" in user_keys and cfg.lr_critic is not None:
        checks.append(("lr_critic", cfg.lr_critic, LR_GRID))
    if "sigma" in user_keys:
        checks.append(("sigma", cfg.sigma, sigma_grid))
    for name, value, grid in checks:
        if not _close_to_any(value, grid):
            raise ConfigError(
                f"{name} = {value} is outside the documented grid {grid}; "
                f"pass force = true to override")
    if cfg.algo == "ars" and ("n_directions" in user_keys or "n_elite" in user_keys):
        if (cfg.n_directions, cfg.n_elite) not in DIRECTIONS_GRID:
            raise ConfigError(
                f"(n_directions, n_elite) = ({cfg.n_directions}, {cfg.n_elite}) is "
                f"outside the documented grid {DIRECTIONS_GRID}; pass force = true "
                f"to override")
