"""Policy heads, initialization schemes, perturbation, and gradient identities."""

import numpy as np
import pytest

from pbvf.errors import ConfigError
from pbvf.numerics import SeededRng, finite_diff
from pbvf.policies import (
    PolicyParams,
    act,
    arch_layer_sizes,
    log_prob,
    log_prob_grad,
    perturb,
    policy_init,
    policy_vjp,
    sample_action,
    theta_dim,
)


def rel_err(a, b):
    scale = max(float(np.max(np.abs(b))), 1e-8)
    return float(np.max(np.abs(a - b))) / scale


def test_arch_sizes_and_theta_dim():
    assert arch_layer_sizes("lin", 4, 2) == (4, 2)
    assert arch_layer_sizes("mlp32", 4, 2) == (4, 32, 2)
    assert arch_layer_sizes("mlp64x64", 4, 2) == (4, 64, 64, 2)
    assert theta_dim("lin", "det_continuous", 4, 2) == 10
    assert theta_dim("lin", "gaussian", 4, 2) == 12


def test_reference_default_bounds_linear_2d():
    rng = SeededRng(0)
    pol = policy_init("lin", "det_continuous", 2, 1, rng)
    bound = 1.0 / np.sqrt(2.0)
    assert np.all(np.abs(pol.theta) < bound)
    zero = policy_init("lin", "det_continuous", 2, 1, None, scheme="zeros")
    assert np.array_equal(zero.theta, np.zeros(3))


def test_gaussian_log_std_tail_starts_at_zero():
    pol = policy_init("mlp32", "gaussian", 3, 2, SeededRng(1))
    assert np.array_equal(pol.omega(), np.zeros(2))
    assert pol.theta.shape[0] == pol.net_param_count + 2


def test_det_continuous_bounded_and_unsquashed_not():
    rng = SeededRng(2)
    squash = policy_init("mlp32", "det_continuous", 3, 2, rng)
    big = squash.with_theta(squash.theta * 50.0)
    a = act(big, np.array([5.0, -3.0, 2.0]))
    assert np.all(np.abs(a) < 1.0)

    raw = PolicyParams("lin", "det_unsquashed", 1, 1, np.array([4.0, 1.0]))
    a = act(raw, np.array([2.0]))
    assert a[0] == 9.0


def test_discrete_argmax_ties_take_lowest_index():
    pol = PolicyParams("lin", "det_discrete", 2, 3, np.zeros(9))
    assert act(pol, np.array([0.3, -0.7])) == 0
    w = np.zeros(9)
    w[8] = 1.0  # bias of logit 2
    pol2 = PolicyParams("lin", "det_discrete", 2, 3, w)
    assert act(pol2, np.array([0.0, 0.0])) == 2


def test_perturb_statistics_and_zero_sigma():
    pol = policy_init("lin", "det_continuous", 3, 2, SeededRng(3))
    rng = SeededRng(4)
    tilde = perturb(pol, 0.0, rng)
    assert np.array_equal(tilde.theta_tilde, pol.theta)

    draws = np.stack([perturb(pol, 0.5, rng).theta_tilde - pol.theta for _ in range(4000)])
    assert abs(float(draws.std()) - 0.5) < 0.01
    assert abs(float(draws.mean())) < 0.02
    assert np.array_equal(pol.theta, tilde.base.theta)  # base untouched


def test_policy_vjp_matches_finite_diff():
    meta = np.random.default_rng(17)
    for k in range(20):
        arch = ["lin", "mlp32", "mlp64x64"][k % 3]
        head = "det_continuous" if k % 2 == 0 else "det_unsquashed"
        sdim = int(meta.integers(1, 5))
        adim = int(meta.integers(1, 4))
        pol = policy_init(arch, head, sdim, adim, SeededRng(500 + k))
        s = meta.normal(size=sdim)
        upstream = meta.normal(size=adim)
        got = policy_vjp(pol, s, upstream)

        def f(theta):
            return float(np.dot(upstream, act(pol.with_theta(theta), s)))

        fd = finite_diff(f, pol.theta)
        assert rel_err(got, fd) < 1e-6, f"instance {k}"


def test_policy_vjp_rejects_nondifferentiable_heads():
    disc = policy_init("lin", "det_discrete", 2, 2, SeededRng(0))
    with pytest.raises(ConfigError):
        policy_vjp(disc, np.zeros(2), np.zeros(2))
    gauss = policy_init("lin", "gaussian", 2, 2, SeededRng(0))
    with pytest.raises(ConfigError):
        policy_vjp(gauss, np.zeros(2), np.zeros(2))


def test_log_prob_grad_matches_finite_diff():
    meta = np.random.default_rng(23)
    for k in range(20):
        arch = ["lin", "mlp32"][k % 2]
        sdim = int(meta.integers(1, 4))
        adim = int(meta.integers(1, 3))
        pol = policy_init(arch, "gaussian", sdim, adim, SeededRng(700 + k))
        pol.omega()[...] = meta.normal(size=adim) * 0.3
        s = meta.normal(size=sdim)
        u = meta.normal(size=adim)
        logp, grad = log_prob_grad(pol, s, u)
        assert abs(logp - log_prob(pol, s, u)) < 1e-12

        def f(theta):
            return log_prob(pol.with_theta(theta), s, u)

        fd = finite_diff(f, pol.theta)
        assert rel_err(grad, fd) < 1e-6, f"instance {k}"


def test_log_prob_grad_at_the_mean():
    pol = policy_init("mlp32", "gaussian", 3, 2, SeededRng(9))
    s = np.array([0.4, -1.2, 0.7])
    from pbvf.numerics import mlp_forward

    u = mlp_forward(pol.net(), s)  # exactly the mean
    _, grad = log_prob_grad(pol, s, u)
    assert np.array_equal(grad[: pol.net_param_count], np.zeros(pol.net_param_count))
    assert np.array_equal(grad[pol.net_param_count :], -np.ones(2))


def test_sample_action_moments_and_squash():
    pol = policy_init("lin", "gaussian", 2, 1, SeededRng(11))
    pol.omega()[0] = np.log(0.5)
    s = np.array([0.3, -0.4])
    rng = SeededRng(12)
    us = []
    for _ in range(20000):
        a, u, logp = sample_action(pol, s, rng)
        us.append(u[0])
        assert -1.0 < a[0] < 1.0
        assert np.isfinite(logp)
    from pbvf.numerics import mlp_forward

    mean = mlp_forward(pol.net(), s)[0]
    assert abs(np.mean(us) - mean) < 0.02
    assert abs(np.std(us) - 0.5) < 0.01


def test_deterministic_eval_of_gaussian_uses_mean():
    pol = policy_init("lin", "gaussian", 2, 1, SeededRng(13))
    s = np.array([1.0, 2.0])
    from pbvf.numerics import mlp_forward

    assert np.allclose(act(pol, s), np.tanh(mlp_forward(pol.net(), s)), atol=0)
