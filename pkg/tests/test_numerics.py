"""Kernel-level checks: MLP forward/backward, Adam, seeded RNG, finite differences."""

import math

import numpy as np
import pytest

from pbvf.errors import NumericError
from pbvf.numerics import (
    AdamState,
    MlpNet,
    SeededRng,
    adam_init,
    adam_step,
    finite_diff,
    gaussian_sample,
    mlp_backward,
    mlp_forward,
    mlp_init,
    param_count,
)


def naive_forward(net: MlpNet, x: np.ndarray) -> np.ndarray:
    """Second, loop-based implementation of the same net for cross-checking."""
    out = np.array(x, dtype=np.float64)
    layers = net.layers()
    for i, (w, b) in enumerate(layers):
        pre = np.array([float(np.dot(w[j], out)) + float(b[j]) for j in range(w.shape[0])])
        kind = net.output_activation if i == len(layers) - 1 else net.hidden_activation
        if kind == "relu":
            out = np.maximum(pre, 0.0)
        elif kind == "tanh":
            out = np.tanh(pre)
        else:
            out = pre
    return out


def random_net(rng: SeededRng, depth_rng: np.random.Generator) -> MlpNet:
    n_layers = int(depth_rng.integers(2, 5))
    sizes = [int(depth_rng.integers(1, 7)) for _ in range(n_layers)]
    hidden = "relu" if depth_rng.integers(2) else "tanh"
    out_act = "identity" if depth_rng.integers(2) else "tanh"
    return mlp_init(sizes, rng, hidden_activation=hidden, output_activation=out_act)


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-8)
    return float(np.max(np.abs(a - b))) / scale


def test_param_count_example():
    assert param_count([3, 16, 16, 1]) == 353


def test_layer_views_alias_flat_vector():
    rng = SeededRng(0)
    net = mlp_init([4, 5, 2], rng)
    w0, b0 = net.layers()[0]
    w0[1, 2] = 7.5
    b0[0] = -3.25
    assert net.params[1 * 4 + 2] == 7.5
    assert net.params[4 * 5] == -3.25


def test_forward_matches_naive_many_shapes():
    meta = np.random.default_rng(1234)
    for k in range(25):
        net = random_net(SeededRng(100 + k), meta)
        x = meta.normal(size=net.in_dim)
        got = mlp_forward(net, x)
        want = naive_forward(net, x)
        assert rel_err(got, want) < 1e-12


def test_forward_batch_matches_single_rows():
    rng = SeededRng(7)
    net = mlp_init([3, 8, 2], rng, hidden_activation="tanh")
    xb = np.random.default_rng(5).normal(size=(6, 3))
    batch = mlp_forward(net, xb)
    for i in range(6):
        assert np.allclose(batch[i], mlp_forward(net, xb[i]), rtol=1e-12, atol=1e-14)


def test_backward_param_grads_match_finite_diff():
    meta = np.random.default_rng(99)
    for k in range(22):
        net = random_net(SeededRng(200 + k), meta)
        x = meta.normal(size=net.in_dim)
        upstream = meta.normal(size=net.out_dim)
        grad_p, _ = mlp_backward(net, x, upstream)

        def f(flat):
            probe = MlpNet(net.layer_sizes, flat.copy(), net.hidden_activation,
                           net.output_activation)
            return float(np.dot(upstream, mlp_forward(probe, x)))

        fd = finite_diff(f, net.params)
        assert rel_err(grad_p, fd) < 1e-6, f"instance {k}"


def test_backward_input_grads_match_finite_diff():
    meta = np.random.default_rng(77)
    for k in range(22):
        net = random_net(SeededRng(300 + k), meta)
        x = meta.normal(size=net.in_dim)
        upstream = meta.normal(size=net.out_dim)
        _, grad_x = mlp_backward(net, x, upstream)

        def f(xv):
            return float(np.dot(upstream, mlp_forward(net, xv)))

        fd = finite_diff(f, x)
        assert rel_err(grad_x, fd) < 1e-6, f"instance {k}"


def test_backward_batch_sums_param_grads_and_stacks_input_grads():
    rng = SeededRng(11)
    net = mlp_init([4, 6, 3], rng)
    gen = np.random.default_rng(3)
    xb = gen.normal(size=(5, 4))
    ub = gen.normal(size=(5, 3))
    gp_batch, gx_batch = mlp_backward(net, xb, ub)
    gp_sum = np.zeros_like(net.params)
    for i in range(5):
        gp_i, gx_i = mlp_backward(net, xb[i], ub[i])
        gp_sum += gp_i
        assert np.allclose(gx_batch[i], gx_i, rtol=1e-12, atol=1e-14)
    assert np.allclose(gp_batch, gp_sum, rtol=1e-12, atol=1e-14)


def test_backward_shape_mismatch_raises():
    net = mlp_init([3, 2], SeededRng(0))
    with pytest.raises(NumericError):
        mlp_backward(net, np.zeros(4), np.zeros(2))
    with pytest.raises(NumericError):
        mlp_backward(net, np.zeros(3), np.zeros(3))


def reference_adam(params, grads_seq, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Textbook Adam with bias correction, scalar loop form."""
    p = params.copy()
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    for t, g in enumerate(grads_seq, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        mh = m / (1 - beta1 ** t)
        vh = v / (1 - beta2 ** t)
        p = p - lr * mh / (np.sqrt(vh) + eps)
    return p


def test_adam_matches_reference_sequence():
    gen = np.random.default_rng(42)
    p = gen.normal(size=10)
    grads = [gen.normal(size=10) for _ in range(50)]
    st = adam_init(10, lr=0.01)
    live = p.copy()
    for g in grads:
        adam_step(st, live, g)
    ref = reference_adam(p, grads, lr=0.01)
    assert np.allclose(live, ref, rtol=0, atol=1e-14)
    assert st.step_count == 50


def test_adam_minimizes_quadratic():
    x = np.array([3.0])
    st = adam_init(1, lr=0.05)
    for _ in range(2000):
        adam_step(st, x, 2.0 * x)
    assert abs(x[0]) < 1e-3


def test_adam_rejects_nonfinite_and_mismatched():
    st = adam_init(3, lr=0.01)
    p = np.zeros(3)
    with pytest.raises(NumericError):
        adam_step(st, p, np.array([1.0, np.nan, 0.0]))
    with pytest.raises(NumericError):
        adam_step(st, np.zeros(4), np.zeros(4))


def test_seeded_rng_reproducible_and_substreams_independent():
    a = SeededRng(123)
    b = SeededRng(123)
    assert np.array_equal(a.normal(size=20), b.normal(size=20))

    s1 = SeededRng(123).substream(4)
    s1_again = SeededRng(123).substream(4)
    s2 = SeededRng(123).substream(5)
    x1 = s1.normal(size=20)
    assert np.array_equal(x1, s1_again.normal(size=20))
    assert not np.array_equal(x1, s2.normal(size=20))

    nested = SeededRng(123).substream(4, 7)
    nested_again = SeededRng(123).substream(4).substream(7)
    assert np.array_equal(nested.normal(size=8), nested_again.normal(size=8))


def test_gaussian_sample_moments_and_zero_sigma():
    rng = SeededRng(2024)
    draws = gaussian_sample(rng, 1_000_000, 2.0)
    assert abs(float(np.std(draws)) - 2.0) < 0.02
    assert abs(float(np.mean(draws))) < 0.01
    assert np.array_equal(gaussian_sample(rng, 5, 0.0), np.zeros(5))
    with pytest.raises(NumericError):
        gaussian_sample(rng, 5, -1.0)


def test_finite_diff_quadratic_and_nonfinite():
    gen = np.random.default_rng(8)
    a = gen.normal(size=6)
    b_mat = gen.normal(size=(6, 6))
    b_mat = b_mat + b_mat.T

    def f(x):
        return float(a @ x + x @ b_mat @ x)

    x0 = gen.normal(size=6)
    fd = finite_diff(f, x0)
    analytic = a + 2.0 * b_mat @ x0
    assert rel_err(fd, analytic) < 1e-7

    def bad(x):
        return math.inf

    with pytest.raises(NumericError):
        finite_diff(bad, x0)
