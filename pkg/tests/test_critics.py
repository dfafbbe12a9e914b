"""Critic predictions, updates, and the three actor-gradient forms."""

import numpy as np
import pytest

from pbvf.critics import (
    actor_grad_pavf,
    actor_grad_pavf_stochastic,
    actor_grad_psvf,
    assemble_inputs,
    critic_init,
    critic_predict,
    load_critic,
    mc_update,
    predict_batch,
    save_critic,
    td_target,
    td_update,
)
from pbvf.errors import ConfigError, DegenerateRatioError
from pbvf.numerics import MlpNet, SeededRng, finite_diff, mlp_forward
from pbvf.policies import PolicyParams, log_prob, policy_init

SMALL = (16, 8)


def rel_err(a, b):
    scale = max(float(np.max(np.abs(b))), 1e-8)
    return float(np.max(np.abs(a - b))) / scale


def small_critic(kind, sdim, adim, tdim, seed, lr=1e-3, activation="tanh"):
    return critic_init(kind, sdim, adim, tdim, lr, SeededRng(seed),
                       hidden=SMALL, activation=activation)


def test_input_assembly_order_state_action_theta():
    critic = small_critic("pavf", 2, 1, 3, seed=0)
    # Identity readout: one linear layer summing all inputs with known weights.
    w = np.zeros(critic.net.params.shape)
    critic.net = MlpNet((critic.input_dim, 1), np.concatenate(
        [np.array([1.0, 10.0, 100.0, 1000.0, 10000.0, 100000.0]), np.zeros(1)]),
        hidden_activation="tanh", output_activation="identity")
    val = critic_predict(critic, theta=np.array([0.3, 0.2, 0.1]),
                         state=np.array([5.0, 4.0]), action=np.array([3.0]))
    assert val == pytest.approx(5.0 + 40.0 + 300.0 + 300.0 + 2000.0 + 10000.0, abs=1e-9)


def test_predict_matches_batch():
    critic = small_critic("psvf", 3, 0, 4, seed=1)
    gen = np.random.default_rng(0)
    states = gen.normal(size=(6, 3))
    thetas = gen.normal(size=(6, 4))
    x = assemble_inputs(critic, thetas, states)
    batch = predict_batch(critic, x)
    for i in range(6):
        assert batch[i] == pytest.approx(
            critic_predict(critic, thetas[i], state=states[i]), abs=1e-12)


def test_mc_update_gradient_matches_finite_diff():
    gen = np.random.default_rng(2)
    critic = small_critic("pssvf", 0, 0, 5, seed=3, lr=1e-2)
    thetas = gen.normal(size=(8, 5))
    rets = gen.normal(size=8)
    params0 = critic.net.params.copy()

    def loss_at(flat):
        probe = MlpNet(critic.net.layer_sizes, flat.copy(), "tanh", "identity")
        preds = mlp_forward(probe, thetas)[:, 0]
        return float(np.mean((preds - rets) ** 2))

    fd = finite_diff(loss_at, params0)

    # Reproduce the analytic gradient by a single Adam step from zero moments:
    # adam's first step direction is sign-like, so instead check descent and
    # the loss value; the gradient itself is validated through td/actor paths.
    loss0 = mc_update(critic, thetas, rets)
    assert loss0 == pytest.approx(loss_at(params0), abs=1e-12)
    # First Adam step must move against the finite-difference gradient
    # componentwise (sign agreement wherever fd is clearly nonzero).
    moved = critic.net.params - params0
    mask = np.abs(fd) > 1e-7
    assert np.all(np.sign(moved[mask]) == -np.sign(fd[mask]))
    for _ in range(300):
        loss = mc_update(critic, thetas, rets)
    assert loss < loss0


def test_td_update_semi_gradient_matches_finite_diff_with_frozen_targets():
    gen = np.random.default_rng(4)
    critic = small_critic("psvf", 2, 0, 3, seed=5, lr=1e-3)
    b = 7
    states = gen.normal(size=(b, 2))
    thetas = gen.normal(size=(b, 3))
    next_states = gen.normal(size=(b, 2))
    rewards = gen.normal(size=b)
    dones = gen.integers(0, 2, size=b).astype(bool)
    x = assemble_inputs(critic, thetas, states)
    x_next = assemble_inputs(critic, thetas, next_states)
    gamma = 0.99

    params0 = critic.net.params.copy()
    frozen_targets = rewards + gamma * (1.0 - dones) * mlp_forward(critic.net, x_next)[:, 0]

    def semi_loss(flat):
        probe = MlpNet(critic.net.layer_sizes, flat.copy(), "tanh", "identity")
        preds = mlp_forward(probe, x)[:, 0]
        return float(np.mean((preds - frozen_targets) ** 2))

    def residual_loss(flat):
        probe = MlpNet(critic.net.layer_sizes, flat.copy(), "tanh", "identity")
        preds = mlp_forward(probe, x)[:, 0]
        boots = rewards + gamma * (1.0 - dones) * mlp_forward(probe, x_next)[:, 0]
        return float(np.mean((preds - boots) ** 2))

    fd_semi = finite_diff(semi_loss, params0)
    fd_res = finite_diff(residual_loss, params0)
    # The two objectives genuinely differ here, so the forms are distinguishable.
    assert rel_err(fd_semi, fd_res) > 1e-3

    loss = td_update(critic, x, rewards, dones, x_next, gamma, semi_gradient=True)
    assert loss == pytest.approx(semi_loss(params0), abs=1e-12)
    moved = critic.net.params - params0
    mask = np.abs(fd_semi) > 1e-6
    assert np.all(np.sign(moved[mask]) == -np.sign(fd_semi[mask]))

    critic2 = small_critic("psvf", 2, 0, 3, seed=5, lr=1e-3)
    td_update(critic2, x, rewards, dones, x_next, gamma, semi_gradient=False)
    moved2 = critic2.net.params - params0
    mask2 = np.abs(fd_res) > 1e-6
    assert np.all(np.sign(moved2[mask2]) == -np.sign(fd_res[mask2]))


def test_td_target_done_cuts_bootstrap():
    critic = small_critic("psvf", 2, 0, 3, seed=6)
    x_next = np.ones(critic.input_dim)
    assert td_target(critic, 2.5, True, x_next, 0.99) == 2.5
    v = predict_batch(critic, x_next[None, :])[0]
    assert td_target(critic, 2.5, False, x_next, 0.99) == pytest.approx(2.5 + 0.99 * v)


def test_actor_grad_psvf_matches_finite_diff():
    meta = np.random.default_rng(7)
    for k in range(20):
        sdim = int(meta.integers(1, 4))
        tdim = int(meta.integers(2, 6))
        critic = small_critic("psvf", sdim, 0, tdim, seed=800 + k)
        states = meta.normal(size=(int(meta.integers(1, 6)), sdim))
        theta = meta.normal(size=tdim)
        got = actor_grad_psvf(critic, states, theta)

        def f(th):
            vals = [critic_predict(critic, th, state=s) for s in states]
            return float(np.mean(vals))

        fd = finite_diff(f, theta)
        assert rel_err(got, fd) < 1e-6, f"instance {k}"


def test_actor_grad_pavf_exact_matches_finite_diff():
    meta = np.random.default_rng(8)
    for k in range(20):
        sdim = int(meta.integers(1, 4))
        adim = int(meta.integers(1, 3))
        head = "det_continuous" if k % 2 == 0 else "det_unsquashed"
        policy = policy_init("lin" if k % 3 else "mlp32", head, sdim, adim,
                             SeededRng(900 + k))
        critic = small_critic("pavf", sdim, adim, policy.theta.shape[0], seed=950 + k)
        states = meta.normal(size=(int(meta.integers(1, 5)), sdim))
        got = actor_grad_pavf(critic, states, policy, mode="exact")

        def f(th):
            pol = policy.with_theta(th)
            vals = [critic_predict(critic, th, state=s,
                                    action=np.atleast_1d(mlp_forward(pol.net(), s)))
                    for s in states]
            return float(np.mean(vals))

        fd = finite_diff(f, policy.theta)
        assert rel_err(got, fd) < 1e-6, f"instance {k}"


def test_actor_grad_pavf_direct_matches_theta_input_path():
    meta = np.random.default_rng(9)
    policy = policy_init("lin", "det_continuous", 2, 1, SeededRng(33))
    critic = small_critic("pavf", 2, 1, policy.theta.shape[0], seed=34)
    states = meta.normal(size=(4, 2))
    actions = np.atleast_2d(mlp_forward(policy.net(), states))
    got = actor_grad_pavf(critic, states, policy, mode="direct")

    def f(th_input):
        vals = [critic_predict(critic, th_input, state=states[i], action=actions[i])
                for i in range(4)]
        return float(np.mean(vals))

    fd = finite_diff(f, policy.theta)
    assert rel_err(got, fd) < 1e-6


def test_actor_grad_pavf_decomposition_bitwise():
    meta = np.random.default_rng(10)
    for k in range(10):
        sdim = int(meta.integers(1, 4))
        adim = int(meta.integers(1, 3))
        policy = policy_init("mlp32" if k % 2 else "lin", "det_continuous", sdim, adim,
                             SeededRng(1100 + k))
        critic = small_critic("pavf", sdim, adim, policy.theta.shape[0], seed=1200 + k,
                              activation="relu")
        states = meta.normal(size=(int(meta.integers(1, 6)), sdim))
        exact = actor_grad_pavf(critic, states, policy, mode="exact")
        biased = actor_grad_pavf(critic, states, policy, mode="biased")
        direct = actor_grad_pavf(critic, states, policy, mode="direct")
        assert np.array_equal(exact, biased + direct)


def test_actor_grad_pavf_stochastic_matches_product_rule_finite_diff():
    meta = np.random.default_rng(11)
    for k in range(20):
        sdim = int(meta.integers(1, 4))
        adim = int(meta.integers(1, 3))
        policy = policy_init("lin" if k % 2 else "mlp32", "gaussian", sdim, adim,
                             SeededRng(1300 + k))
        policy.omega()[...] = meta.normal(size=adim) * 0.2
        critic = small_critic("pavf", sdim, adim, policy.theta.shape[0], seed=1400 + k)
        b = int(meta.integers(2, 6))
        states = meta.normal(size=(b, sdim))
        us = meta.normal(size=(b, adim))
        # Behavioral density from a nearby perturbed policy.
        behavior = policy.with_theta(policy.theta + 0.1 * meta.normal(size=policy.theta.shape))
        logps_b = np.array([log_prob(behavior, states[i], us[i]) for i in range(b)])

        got = actor_grad_pavf_stochastic(critic, states, us, logps_b, policy)

        def f(th):
            pol = policy.with_theta(th)
            total = 0.0
            for i in range(b):
                rho = np.exp(log_prob(pol, states[i], us[i]) - logps_b[i])
                total += rho * critic_predict(critic, th, state=states[i], action=us[i])
            return total / b

        fd = finite_diff(f, policy.theta)
        assert rel_err(got, fd) < 1e-6, f"instance {k}"


def test_actor_grad_pavf_stochastic_degenerate_ratio_raises():
    policy = policy_init("lin", "gaussian", 2, 1, SeededRng(50))
    critic = small_critic("pavf", 2, 1, policy.theta.shape[0], seed=51)
    states = np.zeros((2, 2))
    us = np.zeros((2, 1))
    bad_logps = np.array([-np.inf, 0.0])
    with pytest.raises(DegenerateRatioError):
        actor_grad_pavf_stochastic(critic, states, us, bad_logps, policy)


def test_kind_guards():
    psvf = small_critic("psvf", 2, 0, 3, seed=60)
    with pytest.raises(ConfigError):
        mc_update(psvf, np.zeros((2, 3)), np.zeros(2))
    pssvf = small_critic("pssvf", 0, 0, 3, seed=61)
    with pytest.raises(ConfigError):
        actor_grad_psvf(pssvf, np.zeros((2, 2)), np.zeros(3))


def test_checkpoint_roundtrip(tmp_path):
    critic = small_critic("pavf", 2, 1, 4, seed=70)
    path = str(tmp_path / "critic.npz")
    save_critic(critic, path, extra={"env": "lqr", "arch": "lin"})
    loaded, extra = load_critic(path)
    assert extra == {"env": "lqr", "arch": "lin"}
    assert loaded.kind == "pavf"
    assert np.array_equal(loaded.net.params, critic.net.params)
    x = np.ones((1, critic.input_dim))
    assert predict_batch(loaded, x)[0] == predict_batch(critic, x)[0]
