"""Critics that condition on policy weights.

Three kinds, differing only in input layout (always state, then action, then
the flat policy vector theta):

  pssvf   V(theta)        trained on Monte Carlo episodic returns
  psvf    V(s, theta)     trained on one-step bootstrapped targets
  pavf    Q(s, a, theta)  trained on one-step bootstrapped targets

The actor gradients exploit the input-gradient path of the same network: the
policy improves by ascending the critic's prediction directly with respect to
theta, which for the action-value critic splits into an action path (through
the policy) and a direct theta path, returned separately so the truncated
variant is the same floats minus one term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DataFormatError, DegenerateRatioError,
                     NumericError)
from .numerics import (
    DTYPE,
    AdamState,
    MlpNet,
    SeededRng,
    adam_init,
    adam_step,
    mlp_backward,
    mlp_forward,
    mlp_init,
)
from .policies import LOG_2PI, PolicyParams, act

CRITIC_KINDS = ("pssvf", "psvf", "pavf")
DEFAULT_HIDDEN = (512, 512)


@dataclass
class PbvfCritic:
    kind: str
    state_dim: int
    action_dim: int
    theta_dim: int
    net: MlpNet
    adam: AdamState

    @property
    def input_dim(self) -> int:
        if self.kind == "pssvf":
            return self.theta_dim
        if self.kind == "psvf":
            return self.state_dim + self.theta_dim
        return self.state_dim + self.action_dim + self.theta_dim

    def theta_slice(self) -> slice:
        return slice(self.input_dim - self.theta_dim, self.input_dim)

    def action_slice(self) -> slice:
        if self.kind != "pavf":
            raise ConfigError(f"{self.kind} critic has no action input")
        return slice(self.state_dim, self.state_dim + self.action_dim)


def critic_init(kind: str, state_dim: int, action_dim: int, theta_dim: int,
                lr: float, rng: SeededRng, hidden: tuple[int, ...] = DEFAULT_HIDDEN,
                activation: str = "relu") -> PbvfCritic:
    if kind not in CRITIC_KINDS:
        raise ConfigError(f"unknown critic kind {kind!r}")
    probe = PbvfCritic(kind, state_dim, action_dim, theta_dim,
                       net=None, adam=None)  # only for input_dim
    sizes = (probe.input_dim, *hidden, 1)
    net = mlp_init(sizes, rng, hidden_activation=activation, output_activation="identity")
    return PbvfCritic(kind, state_dim, action_dim, theta_dim, net,
                      adam_init(net.params.shape[0], lr))


def assemble_inputs(critic: PbvfCritic, thetas: np.ndarray,
                    states: np.ndarray | None = None,
                    actions: np.ndarray | None = None) -> np.ndarray:
    """Stack batch inputs in the fixed state | action | theta order."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=DTYPE))
    parts = []
    if critic.kind in ("psvf", "pavf"):
        if states is None:
            raise NumericError(f"{critic.kind} critic needs states")
        parts.append(np.atleast_2d(np.asarray(states, dtype=DTYPE)))
    if critic.kind == "pavf":
        if actions is None:
            raise NumericError("pavf critic needs actions")
        parts.append(np.atleast_2d(np.asarray(actions, dtype=DTYPE)))
    parts.append(thetas)
    x = np.concatenate(parts, axis=1)
    if x.shape[1] != critic.input_dim:
        raise NumericError(f"assembled width {x.shape[1]} != critic input {critic.input_dim}")
    return x


def predict_batch(critic: PbvfCritic, inputs: np.ndarray) -> np.ndarray:
    return mlp_forward(critic.net, inputs)[:, 0]


def critic_predict(critic: PbvfCritic, theta: np.ndarray,
                   state: np.ndarray | None = None,
                   action: np.ndarray | None = None) -> float:
    x = assemble_inputs(
        critic, theta[None, :],
        None if state is None else np.asarray(state)[None, :],
        None if action is None else np.asarray(action)[None, :],
    )
    return float(predict_batch(critic, x)[0])


def mc_update(critic: PbvfCritic, thetas: np.ndarray, returns: np.ndarray) -> float:
    """One Adam step on mean squared error against episodic returns.

    Returns the pre-update loss."""
    if critic.kind != "pssvf":
        raise ConfigError("mc_update applies to the episodic critic only")
    x = assemble_inputs(critic, thetas)
    returns = np.asarray(returns, dtype=DTYPE)
    preds = predict_batch(critic, x)
    err = preds - returns
    loss = float(np.mean(err * err))
    upstream = (2.0 / x.shape[0]) * err
    grad, _ = mlp_backward(critic.net, x, upstream[:, None])
    adam_step(critic.adam, critic.net.params, grad)
    return loss


def td_target(critic: PbvfCritic, reward: float, done: bool,
              next_input: np.ndarray, gamma: float) -> float:
    """Single bootstrapped target r + gamma * V(next) (zero bootstrap on done)."""
    if done:
        return float(reward)
    return float(reward + gamma * predict_batch(critic, next_input[None, :])[0])


def td_update(critic: PbvfCritic, inputs: np.ndarray, rewards: np.ndarray,
              dones: np.ndarray, next_inputs: np.ndarray, gamma: float,
              semi_gradient: bool = True) -> float:
    """One Adam step on mean squared TD error. Targets are treated as
    constants in the default semi-gradient form; the residual-gradient form
    also differentiates through the bootstrap term. Returns pre-update loss."""
    rewards = np.asarray(rewards, dtype=DTYPE)
    live = 1.0 - np.asarray(dones, dtype=DTYPE)
    next_preds = predict_batch(critic, next_inputs)
    targets = rewards + gamma * live * next_preds
    preds = predict_batch(critic, inputs)
    err = preds - targets
    loss = float(np.mean(err * err))
    upstream = (2.0 / inputs.shape[0]) * err
    grad, _ = mlp_backward(critic.net, inputs, upstream[:, None])
    if not semi_gradient:
        boot_upstream = -gamma * live * upstream
        grad_boot, _ = mlp_backward(critic.net, next_inputs, boot_upstream[:, None])
        grad = grad + grad_boot
    adam_step(critic.adam, critic.net.params, grad)
    return loss


def actor_grad_pssvf(critic: PbvfCritic, theta: np.ndarray) -> np.ndarray:
    """Gradient of V(theta) with respect to theta."""
    if critic.kind != "pssvf":
        raise ConfigError("actor_grad_pssvf needs a pssvf critic")
    x = assemble_inputs(critic, theta[None, :])
    _, grad_in = mlp_backward(critic.net, x, np.ones((1, 1), dtype=DTYPE))
    return grad_in[0]


def actor_grad_psvf(critic: PbvfCritic, states: np.ndarray,
                    theta: np.ndarray) -> np.ndarray:
    """Gradient of mean_s V(s, theta) with respect to theta."""
    if critic.kind != "psvf":
        raise ConfigError("actor_grad_psvf needs a psvf critic")
    states = np.atleast_2d(np.asarray(states, dtype=DTYPE))
    b = states.shape[0]
    x = assemble_inputs(critic, np.tile(theta, (b, 1)), states)
    ones = np.full((b, 1), 1.0 / b, dtype=DTYPE)
    _, grad_in = mlp_backward(critic.net, x, ones)
    return grad_in[:, critic.theta_slice()].sum(axis=0)


def actor_grad_pavf(critic: PbvfCritic, states: np.ndarray, policy: PolicyParams,
                    mode: str = "exact") -> np.ndarray:
    """Gradient of mean_s Q(s, pi_theta(s), theta) with respect to theta.

    exact  = action path (through the policy) + direct theta input path
    biased = action path only (the truncation used by classic off-policy
             actor-critic updates)
    direct = theta input path only

    The exact vector is computed as the elementwise sum of the other two, so
    exact == biased + direct holds bitwise.
    """
    if critic.kind != "pavf":
        raise ConfigError("actor_grad_pavf needs a pavf critic")
    if policy.head not in ("det_continuous", "det_unsquashed"):
        raise ConfigError("deterministic action-value ascent needs a deterministic head")
    if mode not in ("exact", "biased", "direct"):
        raise ConfigError(f"unknown mode {mode!r}")
    states = np.atleast_2d(np.asarray(states, dtype=DTYPE))
    b = states.shape[0]
    actions = np.atleast_2d(mlp_forward(policy.net(), states))
    x = assemble_inputs(critic, np.tile(policy.theta, (b, 1)), states, actions)
    ones = np.full((b, 1), 1.0 / b, dtype=DTYPE)
    _, grad_in = mlp_backward(critic.net, x, ones)
    grad_action = grad_in[:, critic.action_slice()]
    term_action, _ = mlp_backward(policy.net(), states, grad_action)
    term_direct = grad_in[:, critic.theta_slice()].sum(axis=0)
    if mode == "biased":
        return term_action
    if mode == "direct":
        return term_direct
    return term_action + term_direct


def actor_grad_pavf_stochastic(critic: PbvfCritic, states: np.ndarray,
                               us: np.ndarray, behavior_logps: np.ndarray,
                               policy: PolicyParams) -> np.ndarray:
    """Off-policy gradient for a gaussian policy from stored pre-squash draws.

    Per sample, with rho = pi_theta(u|s) / pi_b(u|s):
        rho * ( Q(s, u, theta) * grad log pi_theta(u|s) + dQ/dtheta_input )
    averaged over the batch. Behavioral densities come in as log
    probabilities recorded at collection time.
    """
    if critic.kind != "pavf":
        raise ConfigError("actor_grad_pavf_stochastic needs a pavf critic")
    if policy.head != "gaussian":
        raise ConfigError("stochastic action-value ascent needs the gaussian head")
    states = np.atleast_2d(np.asarray(states, dtype=DTYPE))
    us = np.atleast_2d(np.asarray(us, dtype=DTYPE))
    behavior_logps = np.asarray(behavior_logps, dtype=DTYPE)
    if not np.all(np.isfinite(behavior_logps)):
        raise DegenerateRatioError("behavioral log-density is not finite for some sample")
    b = states.shape[0]

    pnet = policy.net()
    means = np.atleast_2d(mlp_forward(pnet, states))
    omega = policy.omega()
    inv_var = np.exp(-2.0 * omega)
    resid = us - means
    logps = np.sum(-0.5 * resid * resid * inv_var - omega - 0.5 * LOG_2PI, axis=1)
    ratios = np.exp(logps - behavior_logps)
    if not np.all(np.isfinite(ratios)):
        raise DegenerateRatioError("importance ratio overflowed or is undefined")

    x = assemble_inputs(critic, np.tile(policy.theta, (b, 1)), states, us)
    q_vals = predict_batch(critic, x)
    ones = np.full((b, 1), 1.0 / b, dtype=DTYPE)
    _, grad_in = mlp_backward(critic.net, x, ones)

    weights = ratios * q_vals  # per-sample rho * Q
    d_mean = resid * inv_var
    term_net, _ = mlp_backward(pnet, states, (weights[:, None] * d_mean) / b)
    term_omega = np.mean(weights[:, None] * (resid * resid * inv_var - 1.0), axis=0)
    score_part = np.concatenate([term_net, term_omega])
    # grad_in rows already carry the 1/b factor from the upstream, so the
    # ratio-weighted sum is the batch mean of rho_i * dQ_i/dtheta.
    direct_part = (ratios[:, None] * grad_in[:, critic.theta_slice()]).sum(axis=0)
    return score_part + direct_part


def save_critic(critic: PbvfCritic, path: str, extra: dict | None = None) -> None:
    """Checkpoint: a JSON header (kind, layer sizes, dims, activations and
    any extra run metadata) plus the flat parameter vector."""
    header = {
        "kind": critic.kind,
        "state_dim": critic.state_dim,
        "action_dim": critic.action_dim,
        "theta_dim": critic.theta_dim,
        "layer_sizes": list(critic.net.layer_sizes),
        "hidden_activation": critic.net.hidden_activation,
        "output_activation": critic.net.output_activation,
        "lr": critic.adam.lr,
        "extra": extra or {},
    }
    np.savez(path, header=np.frombuffer(json.dumps(header).encode(), dtype=np.uint8),
             params=critic.net.params)


def load_critic(path: str) -> tuple[PbvfCritic, dict]:
    try:
        blob_ctx = np.load(path)
    except (OSError, ValueError) as e:
        raise DataFormatError(f"cannot read checkpoint {path}: {e}")
    with blob_ctx as blob:
        try:
            header = json.loads(bytes(blob["header"]).decode())
            params = blob["params"].astype(DTYPE)
        except (KeyError, ValueError) as e:
            raise DataFormatError(f"malformed checkpoint {path}: {e}")
    net = MlpNet(tuple(header["layer_sizes"]), params,
                 header["hidden_activation"], header["output_activation"])
    critic = PbvfCritic(header["kind"], header["state_dim"], header["action_dim"],
                        header["theta_dim"], net,
                        adam_init(params.shape[0], header["lr"]))
    return critic, header["extra"]
