"""Low-level numerical kernels.

Everything downstream builds on the four pieces here: a dense MLP with an
explicit backward pass (gradients with respect to both weights and inputs),
an Adam optimizer state, seeded/substreamable random number generation, and
central finite differences for gradient checking.

All floating point work is float64. Network parameters live in one flat
vector laid out layer by layer: the weight matrix in row-major order (rows =
output units), then the bias vector. `param_count` gives the total length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NumericError

DTYPE = np.float64

_HIDDEN_ACTIVATIONS = ("relu", "tanh")
_OUTPUT_ACTIVATIONS = ("identity", "tanh")


def param_count(layer_sizes: Sequence[int]) -> int:
    """Flat parameter length for a dense net with the given layer widths."""
    return sum((n_in + 1) * n_out for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:]))


@dataclass
class MlpNet:
    """Dense net over a flat float64 parameter vector.

    layer_sizes includes input and output widths, e.g. (3, 16, 16, 1).
    hidden_activation applies to every layer except the last;
    output_activation to the last.
    """

    layer_sizes: tuple[int, ...]
    params: np.ndarray
    hidden_activation: str = "relu"
    output_activation: str = "identity"

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise NumericError("MlpNet needs at least input and output widths")
        if self.hidden_activation not in _HIDDEN_ACTIVATIONS:
            raise NumericError(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in _OUTPUT_ACTIVATIONS:
            raise NumericError(f"unknown output activation {self.output_activation!r}")
        expected = param_count(self.layer_sizes)
        if self.params.shape != (expected,):
            raise NumericError(
                f"params shape {self.params.shape} does not match layout length {expected}"
            )
        if self.params.dtype != DTYPE:
            self.params = self.params.astype(DTYPE)

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per-layer (W, b) views into the flat vector. W has shape (out, in)."""
        out = []
        offset = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = self.params[offset : offset + n_in * n_out].reshape(n_out, n_in)
            offset += n_in * n_out
            b = self.params[offset : offset + n_out]
            offset += n_out
            out.append((w, b))
        return out


def mlp_init(
    layer_sizes: Sequence[int],
    rng: "SeededRng | None",
    hidden_activation: str = "relu",
    output_activation: str = "identity",
    scheme: str = "reference_default",
) -> MlpNet:
    """Fresh net. reference_default draws every weight and bias of a layer
    from U(-1/sqrt(fan_in), +1/sqrt(fan_in)); zeros initializes all zero."""
    sizes = tuple(int(n) for n in layer_sizes)
    flat = np.zeros(param_count(sizes), dtype=DTYPE)
    net = MlpNet(sizes, flat, hidden_activation, output_activation)
    if scheme == "reference_default":
        if rng is None:
            raise NumericError("reference_default init needs an rng")
        for w, b in net.layers():
            bound = 1.0 / math.sqrt(w.shape[1])
            w[...] = rng.uniform(-bound, bound, size=w.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)
    elif scheme != "zeros":
        raise NumericError(f"unknown init scheme {scheme!r}")
    return net


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activation_deriv_from_output(a: np.ndarray, kind: str) -> np.ndarray:
    # Derivatives written in terms of the activation output: relu' = 1[a>0],
    # tanh' = 1 - a^2 (valid since a = tanh(z)), identity' = 1.
    if kind == "relu":
        return (a > 0.0).astype(DTYPE)
    if kind == "tanh":
        return 1.0 - a * a
    return np.ones_like(a)


def _forward_cached(net: MlpNet, x: np.ndarray) -> list[np.ndarray]:
    """Activations per layer, index 0 = input batch. x is (B, in)."""
    acts = [x]
    layers = net.layers()
    last = len(layers) - 1
    for i, (w, b) in enumerate(layers):
        z = acts[-1] @ w.T + b
        kind = net.output_activation if i == last else net.hidden_activation
        acts.append(_activate(z, kind))
    return acts


def _as_batch(x: np.ndarray, dim: int, name: str) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim == 1:
        if x.shape[0] != dim:
            raise NumericError(f"{name} length {x.shape[0]} != expected {dim}")
        return x[None, :], True
    if x.ndim == 2:
        if x.shape[1] != dim:
            raise NumericError(f"{name} width {x.shape[1]} != expected {dim}")
        return x, False
    raise NumericError(f"{name} must be 1-D or 2-D, got shape {x.shape}")


def mlp_forward(net: MlpNet, x: np.ndarray) -> np.ndarray:
    """Evaluate the net. Accepts a single input vector or a (B, in) batch."""
    xb, single = _as_batch(x, net.in_dim, "input")
    out = _forward_cached(net, xb)[-1]
    return out[0] if single else out


def mlp_backward(
    net: MlpNet, x: np.ndarray, upstream: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vector-Jacobian product against `upstream`.

    Returns (grad_params, grad_input). grad_params is summed over batch rows;
    grad_input keeps one row per input row (each row's gradient with respect
    to its own input). For 1-D x both come back 1-D.
    """
    xb, single = _as_batch(x, net.in_dim, "input")
    ub, usingle = _as_batch(upstream, net.out_dim, "upstream")
    if single != usingle or xb.shape[0] != ub.shape[0]:
        raise NumericError("input and upstream batch shapes disagree")
    acts = _forward_cached(net, xb)
    layers = net.layers()
    grad_flat = np.zeros_like(net.params)
    grad_views = MlpNet(
        net.layer_sizes, grad_flat, net.hidden_activation, net.output_activation
    ).layers()

    last = len(layers) - 1
    delta = ub * _activation_deriv_from_output(acts[-1], net.output_activation)
    for i in range(last, -1, -1):
        w, _ = layers[i]
        gw, gb = grad_views[i]
        gw[...] = delta.T @ acts[i]
        gb[...] = delta.sum(axis=0)
        delta = delta @ w
        if i > 0:
            delta = delta * _activation_deriv_from_output(acts[i], net.hidden_activation)
    grad_input = delta
    return grad_flat, (grad_input[0] if single else grad_input)


@dataclass
class AdamState:
    """Adam moments for one flat parameter vector. Step count starts at 0."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=DTYPE))
    v: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=DTYPE))


def adam_init(dim: int, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              epsilon: float = 1e-8) -> AdamState:
    return AdamState(lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon,
                     m=np.zeros(dim, dtype=DTYPE), v=np.zeros(dim, dtype=DTYPE))


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> None:
    """One descent step in place (pass the negated gradient to ascend)."""
    if params.shape != state.m.shape or grad.shape != state.m.shape:
        raise NumericError(
            f"adam shapes disagree: params {params.shape}, grad {grad.shape}, "
            f"state {state.m.shape}"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericError("non-finite gradient passed to adam_step")
    state.step_count += 1
    t = state.step_count
    state.m *= state.beta1
    state.m += (1.0 - state.beta1) * grad
    state.v *= state.beta2
    state.v += (1.0 - state.beta2) * grad * grad
    m_hat = state.m / (1.0 - state.beta1 ** t)
    v_hat = state.v / (1.0 - state.beta2 ** t)
    params -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


class SeededRng:
    """PCG64 stream addressed by (seed, substream path).

    Substreams are spawned by extending the path, so any component can carve
    out an independent stream that is a pure function of the root seed and
    its address. Two instances built with the same (seed, path) produce
    identical sequences.
    """

    def __init__(self, seed: int, stream: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream = tuple(int(k) for k in stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def substream(self, *key: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream + key)

    def normal(self, size=None) -> np.ndarray:
        return self.gen.standard_normal(size=size, dtype=DTYPE)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray:
        return self.gen.uniform(low, high, size=size)

    def integers(self, low: int, high: int | None = None, size=None) -> np.ndarray:
        return self.gen.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def gaussian_sample(rng: SeededRng, dim: int, sigma: float) -> np.ndarray:
    """Draw eps ~ N(0, sigma^2 I) in R^dim. sigma = 0 gives exact zeros."""
    if sigma < 0:
        raise NumericError(f"sigma must be >= 0, got {sigma}")
    return sigma * rng.normal(size=dim)


def finite_diff(f: Callable[[np.ndarray], float], x: np.ndarray,
                eps: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function at x."""
    x = np.asarray(x, dtype=DTYPE)
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp.flat[i] += eps
        xm.flat[i] -= eps
        fp = float(f(xp))
        fm = float(f(xm))
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise NumericError(f"non-finite function value in finite_diff at index {i}")
        grad.flat[i] = (fp - fm) / (2.0 * eps)
    return grad
