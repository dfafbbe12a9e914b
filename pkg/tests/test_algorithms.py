"""Training-loop behavior: determinism, schedules, search update algebra,
buffer bookkeeping, checkpoint round trips."""

import numpy as np
import pytest

from pbvf.algorithms import run_algo
from pbvf.algorithms.ars import ars_update
from pbvf.critics import save_critic
from pbvf.errors import ConfigError
from pbvf.harness.config import build_run_config


def _cfg(**kw):
    return build_run_config(kw)


def _run_twice(**kw):
    a = run_algo(_cfg(**kw))
    b = run_algo(_cfg(**kw))
    return a, b


def _curves_equal(a, b):
    return len(a) == len(b) and all(
        x.env_steps == y.env_steps
        and x.mean_return == y.mean_return
        and x.std_return == y.std_return
        for x, y in zip(a, b))


# ---------------------------------------------------------------- search update

def test_search_update_single_direction():
    delta = np.array([[1.0, -2.0, 0.5]])
    theta = np.zeros(3)
    out = ars_update(theta, delta, np.array([1.0]), np.array([0.0]),
                     alpha=0.1, n_elite=1)
    # elite return set {1, 0} has population std 0.5
    expect = 0.1 / (1 * 0.5) * 1.0 * delta[0]
    assert np.allclose(out, expect, atol=1e-15)
    assert np.array_equal(theta, np.zeros(3))  # input untouched


def test_search_update_zero_spread_guard():
    delta = np.array([[3.0, 1.0]])
    out = ars_update(np.zeros(2), delta, np.array([2.0]), np.array([2.0]),
                     alpha=0.5, n_elite=1)
    assert np.array_equal(out, np.zeros(2))


def test_search_update_elite_selection():
    deltas = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    r_plus = np.array([1.0, 5.0, 3.0])
    r_minus = np.array([2.0, 0.0, 4.0])
    alpha, n_elite = 0.2, 2
    out = ars_update(np.zeros(2), deltas, r_plus, r_minus, alpha, n_elite)
    # per-direction score max(r+, r-) = [2, 5, 4] keeps directions 1 and 2
    elite = np.array([5.0, 3.0, 0.0, 4.0])
    scale = alpha / (n_elite * elite.std())
    expect = scale * ((5.0 - 0.0) * deltas[1] + (3.0 - 4.0) * deltas[2])
    assert np.allclose(out, expect, atol=1e-15)


# ---------------------------------------------------------------- determinism

def test_episodic_loop_deterministic():
    a, b = _run_twice(algo="pssvf", env="lqr", steps=500, n_evals=5)
    assert _curves_equal(a.curve, b.curve)
    assert np.array_equal(a.policy.theta, b.policy.theta)
    assert a.episodes == b.episodes == 10
    assert a.env_steps == 500
    assert [p.env_steps for p in a.curve] == [100, 200, 300, 400, 500]


def test_bootstrapped_loop_deterministic():
    a, b = _run_twice(algo="psvf", env="lqr", steps=200, n_evals=4)
    assert _curves_equal(a.curve, b.curve)
    assert np.array_equal(a.policy.theta, b.policy.theta)


def test_search_loop_deterministic():
    kw = dict(algo="ars", env="lqr", steps=400, n_evals=4, lr_actor=1e-2,
              sigma=1e-1, n_directions=4, n_elite=4)
    a, b = _run_twice(**kw)
    assert _curves_equal(a.curve, b.curve)
    assert np.array_equal(a.policy.theta, b.policy.theta)
    assert a.critic is None
    assert len(a.curve) == 4


def test_seeds_differ():
    a = run_algo(_cfg(algo="pssvf", env="lqr", steps=500, n_evals=5, seed=0))
    b = run_algo(_cfg(algo="pssvf", env="lqr", steps=500, n_evals=5, seed=1))
    assert not np.array_equal(a.policy.theta, b.policy.theta)


# ---------------------------------------------------------------- loop details

def test_transition_records_share_episode_weights():
    res = run_algo(_cfg(algo="psvf", env="lqr", steps=150, n_evals=3))
    buf = res.extras["buffer"]
    assert len(buf) == 150
    ids = {id(rec.theta_tilde) for rec in buf.items()}
    assert len(ids) == res.episodes == 3


def test_action_value_modes_run_and_differ():
    base = dict(env="lqr", steps=150, n_evals=3)
    exact = run_algo(_cfg(algo="pavf", **base))
    biased = run_algo(_cfg(algo="pavf-biased", **base))
    assert np.all(np.isfinite(exact.policy.theta))
    assert np.all(np.isfinite(biased.policy.theta))
    assert not np.array_equal(exact.policy.theta, biased.policy.theta)


def test_stochastic_action_value_runs():
    res = run_algo(_cfg(algo="pavf-stoch", env="lqr", steps=150, n_evals=3))
    assert res.policy.head == "gaussian"
    assert np.all(np.isfinite(res.policy.theta))


def test_gaussian_episodic_variant_runs():
    res = run_algo(_cfg(algo="pssvf", env="lqr", steps=200, n_evals=2,
                        stochastic=True, force=True))
    assert res.policy.head == "gaussian"
    assert len(res.curve) == 2


def test_search_starts_from_zero_weights():
    res = run_algo(_cfg(algo="ars", env="lqr", steps=100, n_evals=2,
                        lr_actor=1e-2, sigma=1e-1, n_directions=1, n_elite=1))
    # zeros init plus a few updates: the weights moved but stayed small
    assert res.policy.theta.shape == (2,)
    assert not np.array_equal(res.policy.theta, np.zeros(2))


def test_eval_times_snap_to_schedule_on_long_episodes():
    # checkpoints every 25 steps but episodes end every 50: evaluations pair up
    res = run_algo(_cfg(algo="pssvf", env="lqr", steps=100, n_evals=4))
    assert [p.env_steps for p in res.curve] == [25, 50, 75, 100]
    assert res.curve[0].mean_return == res.curve[1].mean_return
    assert res.curve[2].mean_return == res.curve[3].mean_return


# ---------------------------------------------------------------- zero-shot

def test_zero_shot_from_episodic_checkpoint(tmp_path):
    res = run_algo(_cfg(algo="pssvf", env="lqr", steps=300, n_evals=3))
    path = tmp_path / "critic.npz"
    save_critic(res.critic, str(path), extra={
        "env": "lqr", "arch": "lin", "head": res.policy.head,
        "normalizer": None,
        "online_final_return": res.curve[-1].mean_return,
    })
    zs = run_algo(_cfg(algo="zero-shot", env="lqr", critic_path=str(path),
                       zs_policies=2, zs_steps=10, zs_eval_every=5,
                       zs_eval_episodes=2))
    assert len(zs.extras["curves"]) == 2
    assert all(len(c) == 2 for c in zs.extras["curves"])
    assert np.all(np.isfinite(zs.extras["final_returns"]))
    assert zs.extras["online_final_return"] == res.curve[-1].mean_return
    assert zs.policy.theta.shape == (2,)


def test_zero_shot_env_mismatch_rejected(tmp_path):
    res = run_algo(_cfg(algo="pssvf", env="lqr", steps=100, n_evals=2))
    path = tmp_path / "critic.npz"
    save_critic(res.critic, str(path), extra={"env": "lqr", "arch": "lin",
                                              "head": res.policy.head})
    with pytest.raises(ConfigError, match="checkpoint"):
        run_algo(_cfg(algo="zero-shot", env="cartpole", critic_path=str(path)))


def test_zero_shot_state_critic_needs_snapshot(tmp_path):
    res = run_algo(_cfg(algo="psvf", env="lqr", steps=100, n_evals=2))
    path = tmp_path / "critic.npz"
    save_critic(res.critic, str(path), extra={"env": "lqr", "arch": "lin",
                                              "head": res.policy.head})
    with pytest.raises(ConfigError, match="snapshot"):
        run_algo(_cfg(algo="zero-shot", env="lqr", critic_path=str(path)))


def test_offline_experiment_structure():
    res = run_algo(_cfg(algo="offline-psvf", env="lqr", dataset_size=300,
                        perturb_every=100, offline_updates=20,
                        checkpoint_every=10, zs_policies=2, zs_steps=5,
                        zs_eval_every=5, zs_eval_episodes=1,
                        critic_hidden="64", critic_activation="tanh"))
    cps = res.extras["checkpoints"]
    assert [c["updates"] for c in cps] == [10, 20]
    assert all(np.isfinite(c["td_loss"]) for c in cps)
    assert len(res.extras["episode_returns"]) == res.episodes == 6
    assert np.isfinite(res.extras["best_behavioral"])
    assert np.isfinite(res.extras["best_zero_shot"])
