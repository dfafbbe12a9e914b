"""Tabular MDPs with exact evaluation, plus a tiny named instance.

`FiniteMdp` carries transition and reward tables; the exact helpers compute
the discounted occupancy / stationary weighting by power iteration and the
action values by a direct linear solve, for use as ground truth in gradient
oracles. `chain2` is a fixed ergodic 2-state, 2-action instance exposed both
as a table and as a steppable environment (one-hot observations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..numerics import DTYPE, SeededRng
from .base import EnvModel

STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITERS = 1_000_000


@dataclass
class FiniteMdp:
    transitions: np.ndarray  # (S, A, S), rows sum to 1
    rewards: np.ndarray      # (S, A)
    mu0: np.ndarray          # (S,), initial distribution
    gamma: float

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=DTYPE)
        self.rewards = np.asarray(self.rewards, dtype=DTYPE)
        self.mu0 = np.asarray(self.mu0, dtype=DTYPE)
        s, a, s2 = self.transitions.shape
        if s != s2 or self.rewards.shape != (s, a) or self.mu0.shape != (s,):
            raise NumericError("inconsistent MDP table shapes")
        if not np.allclose(self.transitions.sum(axis=2), 1.0, atol=1e-10):
            raise NumericError("transition rows must sum to 1")
        if not np.isclose(self.mu0.sum(), 1.0, atol=1e-10):
            raise NumericError("mu0 must sum to 1")
        if not 0.0 <= self.gamma < 1.0:
            raise NumericError(f"gamma must be in [0, 1), got {self.gamma}")

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions.shape[1]

    def policy_transition_matrix(self, policy_probs: np.ndarray) -> np.ndarray:
        """State-to-state matrix under `policy_probs` (shape (S, A))."""
        return np.einsum("sa,sat->st", policy_probs, self.transitions)


def exact_stationary_distribution(mdp: FiniteMdp, policy_probs: np.ndarray,
                                  tol: float = STATIONARY_TOL,
                                  max_iters: int = STATIONARY_MAX_ITERS) -> np.ndarray:
    """Stationary distribution of the policy's state chain by power iteration."""
    p_pi = mdp.policy_transition_matrix(policy_probs)
    d = np.full(mdp.n_states, 1.0 / mdp.n_states, dtype=DTYPE)
    for _ in range(max_iters):
        d_next = d @ p_pi
        if float(np.abs(d_next - d).sum()) < tol:
            d_next /= d_next.sum()
            return d_next
        d = d_next
    raise NumericError("stationary distribution power iteration did not converge")


def exact_q_values(mdp: FiniteMdp, policy_probs: np.ndarray) -> np.ndarray:
    """Q^pi as the solution of the linear Bellman system, shape (S, A)."""
    s, a = mdp.n_states, mdp.n_actions
    # M[(s,a),(s',a')] = P(s'|s,a) pi(a'|s')
    m = np.einsum("sat,tb->satb", mdp.transitions, policy_probs).reshape(s * a, s * a)
    q = np.linalg.solve(np.eye(s * a) - mdp.gamma * m, mdp.rewards.reshape(s * a))
    return q.reshape(s, a)


def exact_state_values(mdp: FiniteMdp, policy_probs: np.ndarray) -> np.ndarray:
    return (policy_probs * exact_q_values(mdp, policy_probs)).sum(axis=1)


def chain2_mdp(gamma: float = 0.9) -> FiniteMdp:
    """Fixed ergodic 2-state, 2-action instance used by the oracle CLI.

    Action 0 mostly keeps the current state and only pays in state 0; action 1
    mostly switches and pays double, but only in state 1, so the greedy and
    far-sighted policies differ.
    """
    transitions = np.array([
        [[0.9, 0.1], [0.1, 0.9]],
        [[0.9, 0.1], [0.1, 0.9]],
    ])
    rewards = np.array([
        [1.0, 0.0],
        [0.0, 2.0],
    ])
    mu0 = np.array([1.0, 0.0])
    return FiniteMdp(transitions, rewards, mu0, gamma)


class FiniteMdpEnv(EnvModel):
    """Steppable wrapper over a FiniteMdp with one-hot state observations."""

    action_kind = "discrete"
    obs_normalizable = True

    def __init__(self, mdp: FiniteMdp, seed: int = 0, name: str = "finite-mdp",
                 max_episode_steps: int = 200, rng_stream: tuple[int, ...] = (901,)):
        self.mdp = mdp
        self.name = name
        self.state_dim = mdp.n_states
        self.action_dim = mdp.n_actions
        self.max_episode_steps = max_episode_steps
        self.state_low = np.zeros(mdp.n_states)
        self.state_high = np.ones(mdp.n_states)
        super().__init__(seed, rng_stream)
        self._s = 0

    def _one_hot(self, s: int) -> np.ndarray:
        v = np.zeros(self.mdp.n_states)
        v[s] = 1.0
        return v

    def _reset_state(self, rng: SeededRng) -> np.ndarray:
        self._s = int(rng.gen.choice(self.mdp.n_states, p=self.mdp.mu0))
        return self._one_hot(self._s)

    def _dynamics(self, action):
        reward = float(self.mdp.rewards[self._s, action])
        probs = self.mdp.transitions[self._s, action]
        self._s = int(self.rng.gen.choice(self.mdp.n_states, p=probs))
        return self._one_hot(self._s), reward, False
