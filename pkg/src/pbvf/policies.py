"""Policies as flat weight vectors.

Three function bodies (`lin`, `mlp32`, `mlp64x64`, all tanh hidden units) and
four heads:

  det_continuous  tanh-squashed action in (-1, 1)
  det_unsquashed  raw linear output (the LQR task takes unbounded actions)
  det_discrete    argmax over logits (ties go to the lowest index)
  gaussian        squashed sample tanh(u), u ~ N(mean, exp(2*omega));
                  the per-dimension log-std vector omega sits at the tail of
                  theta, after the network weights. Densities and gradients
                  are taken on the pre-squash u.

Everything a critic needs to condition on the policy is in `theta`, so
perturbation and gradient ascent treat the whole vector uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, NumericError
from .numerics import (
    DTYPE,
    MlpNet,
    SeededRng,
    gaussian_sample,
    mlp_backward,
    mlp_forward,
    param_count,
)

ARCHS = ("lin", "mlp32", "mlp64x64")
HEADS = ("det_continuous", "det_unsquashed", "det_discrete", "gaussian")

LOG_2PI = math.log(2.0 * math.pi)


def arch_layer_sizes(arch: str, state_dim: int, action_dim: int) -> tuple[int, ...]:
    if arch == "lin":
        return (state_dim, action_dim)
    if arch == "mlp32":
        return (state_dim, 32, action_dim)
    if arch == "mlp64x64":
        return (state_dim, 64, 64, action_dim)
    raise ConfigError(f"unknown policy arch {arch!r}; known: {', '.join(ARCHS)}")


def theta_dim(arch: str, head: str, state_dim: int, action_dim: int) -> int:
    n = param_count(arch_layer_sizes(arch, state_dim, action_dim))
    return n + action_dim if head == "gaussian" else n


@dataclass
class PolicyParams:
    arch: str
    head: str
    state_dim: int
    action_dim: int
    theta: np.ndarray

    def __post_init__(self):
        if self.head not in HEADS:
            raise ConfigError(f"unknown policy head {self.head!r}")
        expected = theta_dim(self.arch, self.head, self.state_dim, self.action_dim)
        if self.theta.shape != (expected,):
            raise NumericError(
                f"theta shape {self.theta.shape} != expected ({expected},) for "
                f"{self.arch}/{self.head}"
            )
        if self.theta.dtype != DTYPE:
            self.theta = self.theta.astype(DTYPE)

    @property
    def net_param_count(self) -> int:
        return param_count(arch_layer_sizes(self.arch, self.state_dim, self.action_dim))

    def net(self) -> MlpNet:
        output = "tanh" if self.head == "det_continuous" else "identity"
        return MlpNet(
            arch_layer_sizes(self.arch, self.state_dim, self.action_dim),
            self.theta[: self.net_param_count],
            hidden_activation="tanh",
            output_activation=output,
        )

    def omega(self) -> np.ndarray:
        if self.head != "gaussian":
            raise ConfigError(f"head {self.head} has no log-std tail")
        return self.theta[self.net_param_count :]

    def with_theta(self, theta: np.ndarray) -> "PolicyParams":
        return replace(self, theta=np.asarray(theta, dtype=DTYPE))


@dataclass
class PerturbedPolicy:
    """A noisy copy theta_tilde = theta + eps of a base policy."""

    base: PolicyParams
    theta_tilde: np.ndarray
    sigma: float

    def as_policy(self) -> PolicyParams:
        return self.base.with_theta(self.theta_tilde)


def policy_init(arch: str, head: str, state_dim: int, action_dim: int,
                rng: SeededRng | None, scheme: str = "reference_default") -> PolicyParams:
    """Fresh policy. reference_default draws each layer's weights and biases
    from U(-1/sqrt(fan_in), +1/sqrt(fan_in)); zeros gives an all-zero vector.
    Gaussian log-stds start at zero under both schemes (unit std)."""
    n = theta_dim(arch, head, state_dim, action_dim)
    theta = np.zeros(n, dtype=DTYPE)
    policy = PolicyParams(arch, head, state_dim, action_dim, theta)
    if scheme == "reference_default":
        if rng is None:
            raise NumericError("reference_default init needs an rng")
        for w, b in policy.net().layers():
            bound = 1.0 / math.sqrt(w.shape[1])
            w[...] = rng.uniform(-bound, bound, size=w.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)
    elif scheme != "zeros":
        raise ConfigError(f"unknown init scheme {scheme!r}")
    return policy


def act(policy: PolicyParams, s: np.ndarray, rng: SeededRng | None = None):
    """Action for one state. Deterministic heads ignore rng; the gaussian
    head samples when given an rng and falls back to its mean otherwise."""
    out = mlp_forward(policy.net(), np.asarray(s, dtype=DTYPE))
    if policy.head == "det_discrete":
        return int(np.argmax(out))
    if policy.head in ("det_continuous", "det_unsquashed"):
        return out
    if rng is None:
        return np.tanh(out)
    return sample_action(policy, s, rng)[0]


def sample_action(policy: PolicyParams, s: np.ndarray, rng: SeededRng):
    """Gaussian head draw: returns (action, u, log_prob) with action = tanh(u)."""
    if policy.head != "gaussian":
        raise ConfigError("sample_action requires the gaussian head")
    mean = mlp_forward(policy.net(), np.asarray(s, dtype=DTYPE))
    std = np.exp(policy.omega())
    u = mean + std * rng.normal(size=policy.action_dim)
    return np.tanh(u), u, log_prob(policy, s, u)


def perturb(policy: PolicyParams, sigma: float, rng: SeededRng) -> PerturbedPolicy:
    eps = gaussian_sample(rng, policy.theta.shape[0], sigma)
    return PerturbedPolicy(policy, policy.theta + eps, sigma)


def policy_vjp(policy: PolicyParams, s: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """upstream^T (d action / d theta) for deterministic continuous heads.

    Accepts a single state with a (action_dim,) upstream, or a batch of
    states with matching upstream rows; batch rows are summed, mirroring
    mlp_backward.
    """
    if policy.head not in ("det_continuous", "det_unsquashed"):
        raise ConfigError(f"policy_vjp undefined for head {policy.head}")
    grad, _ = mlp_backward(policy.net(), np.asarray(s, dtype=DTYPE),
                           np.asarray(upstream, dtype=DTYPE))
    return grad


def log_prob(policy: PolicyParams, s: np.ndarray, u: np.ndarray) -> float:
    """Log density of the pre-squash draw u under the gaussian head."""
    if policy.head != "gaussian":
        raise ConfigError("log_prob requires the gaussian head")
    mean = mlp_forward(policy.net(), np.asarray(s, dtype=DTYPE))
    omega = policy.omega()
    z = (np.asarray(u, dtype=DTYPE) - mean) * np.exp(-omega)
    return float(np.sum(-0.5 * z * z - omega - 0.5 * LOG_2PI))


def log_prob_grad(policy: PolicyParams, s: np.ndarray,
                  u: np.ndarray) -> tuple[float, np.ndarray]:
    """(log pi(u|s), gradient with respect to the full theta).

    The mean path backpropagates through the network; each log-std entry gets
    z_i^2 - 1 where z_i is the standardized residual, so at u = mean the
    network part vanishes and every omega component gets exactly -1.
    """
    if policy.head != "gaussian":
        raise ConfigError("log_prob_grad requires the gaussian head")
    net = policy.net()
    s = np.asarray(s, dtype=DTYPE)
    u = np.asarray(u, dtype=DTYPE)
    mean = mlp_forward(net, s)
    omega = policy.omega()
    inv_var = np.exp(-2.0 * omega)
    resid = u - mean
    logp = float(np.sum(-0.5 * resid * resid * inv_var - omega - 0.5 * LOG_2PI))
    d_mean = resid * inv_var
    grad_net, _ = mlp_backward(net, s, d_mean)
    d_omega = resid * resid * inv_var - 1.0
    return logp, np.concatenate([grad_net, d_omega])
