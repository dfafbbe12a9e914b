"""Config resolution: defaults, file parsing, grid validation, rejections."""

import pytest

from pbvf.errors import ConfigError
from pbvf.harness.config import build_run_config, parse_config


def test_defaults_for_pssvf_on_continuous_env():
    cfg = build_run_config({"algo": "pssvf", "env": "mountaincar-cont", "arch": "lin"})
    assert cfg.batch_size == 16
    assert cfg.critic_updates == 10
    assert cfg.actor_updates == 10
    assert cfg.buffer_capacity == 100_000
    assert cfg.gamma == 0.99
    assert cfg.steps == 100_000
    assert cfg.obs_normalization is True
    assert cfg.critic_hidden == (512, 512)
    assert cfg.critic_activation == "relu"
    # tuned selection for this combination
    assert cfg.lr_actor == 1e-3
    assert cfg.lr_critic == 1e-2
    assert cfg.sigma == 1.0


def test_defaults_for_psvf():
    cfg = build_run_config({"algo": "psvf", "env": "cartpole", "arch": "lin"})
    assert cfg.batch_size == 128
    assert cfg.critic_updates == 5
    assert cfg.actor_updates == 1
    assert cfg.update_every == 50


def test_lqr_presets_and_flat_observations():
    cfg = build_run_config({"algo": "pssvf", "env": "lqr"})
    assert cfg.steps == 50_000
    assert cfg.lr_actor == 1e-3
    assert cfg.lr_critic == 1e-2
    assert cfg.sigma == 0.5
    assert cfg.obs_normalization is False
    cfg2 = build_run_config({"algo": "psvf", "env": "lqr"})
    assert cfg2.critic_hidden == (64,)
    assert cfg2.critic_activation == "tanh"
    assert cfg2.update_every == 10


def test_lqr_rejects_normalization():
    with pytest.raises(ConfigError):
        build_run_config({"algo": "pssvf", "env": "lqr", "obs_normalization": True})


def test_config_file_parsing_and_precedence():
    text = "algo = pssvf\nenv = mountaincar-cont\nlr_actor = 1e-4\n# comment\n\nseed = 3\n"
    cfg = build_run_config({}, config_text=text)
    assert cfg.lr_actor == 1e-4
    assert cfg.seed == 3
    # explicit option wins over the file
    cfg = build_run_config({"lr_actor": "1e-2"}, config_text=text)
    assert cfg.lr_actor == 1e-2


def test_malformed_line_names_line_number():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("algo = pssvf\nlr_actor 0.01\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("seed = 1\nseed = 2\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        build_run_config({"algo": "pssvf", "env": "lqr", "warp_factor": "9"})


def test_unknown_algo_env_arch():
    with pytest.raises(ConfigError, match="unknown algo"):
        build_run_config({"algo": "dqn", "env": "lqr"})
    with pytest.raises(ConfigError, match="unknown env"):
        build_run_config({"algo": "pssvf", "env": "humanoid"})
    with pytest.raises(ConfigError, match="unknown arch"):
        build_run_config({"algo": "pssvf", "env": "lqr", "arch": "transformer"})


def test_out_of_grid_lr_needs_force():
    with pytest.raises(ConfigError, match="outside the documented grid"):
        build_run_config({"algo": "pssvf", "env": "cartpole", "lr_actor": "0.5"})
    cfg = build_run_config({"algo": "pssvf", "env": "cartpole", "lr_actor": "0.5",
                            "force": "true"})
    assert cfg.lr_actor == 0.5


def test_grid_membership_accepts_grid_values():
    cfg = build_run_config({"algo": "pssvf", "env": "cartpole", "lr_actor": "1e-4",
                            "sigma": "0.1"})
    assert cfg.lr_actor == 1e-4
    assert cfg.sigma == 0.1


def test_stochastic_flag_restrictions():
    with pytest.raises(ConfigError, match="pavf-stoch"):
        build_run_config({"algo": "pavf", "env": "mountaincar-cont",
                          "stochastic": True})
    with pytest.raises(ConfigError, match="continuous"):
        build_run_config({"algo": "pssvf", "env": "cartpole", "stochastic": True})
    cfg = build_run_config({"algo": "pssvf", "env": "mountaincar-cont",
                            "stochastic": True})
    assert cfg.lr_actor == 1e-2


def test_action_value_needs_continuous_actions():
    for algo in ("pavf", "pavf-biased", "pavf-stoch"):
        with pytest.raises(ConfigError, match="continuous"):
            build_run_config({"algo": algo, "env": "cartpole"})


def test_zero_shot_needs_checkpoint_path():
    with pytest.raises(ConfigError, match="critic_path"):
        build_run_config({"algo": "zero-shot", "env": "lqr"})


def test_ars_needs_tuned_row_or_explicit_params():
    with pytest.raises(ConfigError, match="pass"):
        build_run_config({"algo": "ars", "env": "lqr"})
    cfg = build_run_config({"algo": "ars", "env": "lqr", "lr_actor": "1e-2",
                            "sigma": "1e-2", "n_directions": 4, "n_elite": 4})
    assert cfg.n_directions == 4
    cfg = build_run_config({"algo": "ars", "env": "mountaincar-cont"})
    assert (cfg.lr_actor, cfg.n_directions, cfg.n_elite, cfg.sigma) == (1e-2, 1, 1, 1e-1)


def test_ars_elite_bound_and_grid():
    with pytest.raises(ConfigError, match="n_elite"):
        build_run_config({"algo": "ars", "env": "lqr", "lr_actor": "1e-2",
                          "sigma": "1e-2", "n_directions": 1, "n_elite": 2})
    with pytest.raises(ConfigError, match="outside the documented grid"):
        build_run_config({"algo": "ars", "env": "cartpole", "n_directions": 5,
                          "n_elite": 2})


def test_gamma_and_steps_bounds():
    with pytest.raises(ConfigError, match="gamma"):
        build_run_config({"algo": "pssvf", "env": "lqr", "gamma": "1.5"})
    with pytest.raises(ConfigError, match="n_evals"):
        build_run_config({"algo": "pssvf", "env": "lqr", "steps": 10})


def test_missing_required_keys():
    with pytest.raises(ConfigError, match="algo"):
        build_run_config({"env": "lqr"})
    with pytest.raises(ConfigError, match="env"):
        build_run_config({"algo": "pssvf"})


def test_coercion_errors():
    with pytest.raises(ConfigError, match="integer"):
        build_run_config({"algo": "pssvf", "env": "lqr", "seed": "abc"})
    with pytest.raises(ConfigError, match="boolean"):
        build_run_config({"algo": "pssvf", "env": "lqr", "force": "maybe"})
    cfg = build_run_config({"algo": "pssvf", "env": "lqr",
                            "critic_hidden": "64,64"})
    assert cfg.critic_hidden == (64, 64)
