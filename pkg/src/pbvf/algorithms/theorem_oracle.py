"""Exact policy-gradient identities on tiny tabular MDPs.

For a softmax tabular policy everything is computable in closed form with
linear solves, so the two gradient identities the actor updates rely on can
be checked against finite differences of the actual objectives:

  on-policy:   grad of J(theta) = mu0 . V^theta equals the discounted
               state-weighted score-times-Q sum, with the weighting
               d = mu0^T (I - gamma P_pi)^{-1} (the t = 0 term included).
  off-policy:  with the behavior policy's stationary distribution d_b held
               fixed, grad of J_b(theta) = sum_s d_b(s) V^theta(s) equals the
               two-term sum over d_b; dropping the second term (the classic
               truncation) leaves a measurable bias, reported as its L2 norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs.finite_mdp import (
    FiniteMdp,
    chain2_mdp,
    exact_q_values,
    exact_stationary_distribution,
)
from ..errors import EnumerationBoundError
from ..numerics import DTYPE, finite_diff

MAX_STATES = 5
MAX_ACTIONS = 3


def _check_size(mdp: FiniteMdp) -> None:
    if mdp.n_states > MAX_STATES or mdp.n_actions > MAX_ACTIONS:
        raise EnumerationBoundError(
            f"oracle handles at most {MAX_STATES} states x {MAX_ACTIONS} actions, "
            f"got {mdp.n_states} x {mdp.n_actions}"
        )


def softmax_probs(theta: np.ndarray, n_states: int, n_actions: int) -> np.ndarray:
    logits = np.asarray(theta, dtype=DTYPE).reshape(n_states, n_actions)
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def discounted_state_weighting(mdp: FiniteMdp, policy_probs: np.ndarray) -> np.ndarray:
    """d = mu0^T (I - gamma P_pi)^{-1}, the discounted visitation weighting."""
    p_pi = mdp.policy_transition_matrix(policy_probs)
    return np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * p_pi.T, mdp.mu0)


def start_objective(mdp: FiniteMdp, theta: np.ndarray) -> float:
    """J(theta) = mu0 . V^theta."""
    pi = softmax_probs(theta, mdp.n_states, mdp.n_actions)
    q = exact_q_values(mdp, pi)
    return float(mdp.mu0 @ (pi * q).sum(axis=1))


def _score_q_term(mdp: FiniteMdp, pi: np.ndarray) -> np.ndarray:
    """g[s, (s', b)] = d/dtheta[s', b] of sum_a pi(a|s) Q(s, a), which for the
    softmax parameterization is delta(s, s') pi(b|s) (Q(s, b) - V(s))."""
    q = exact_q_values(mdp, pi)
    v = (pi * q).sum(axis=1)
    s, a = mdp.n_states, mdp.n_actions
    g = np.zeros((s, s * a))
    for st in range(s):
        g[st, st * a : (st + 1) * a] = pi[st] * (q[st] - v[st])
    return g


def theorem1_gradient(mdp: FiniteMdp, theta: np.ndarray) -> np.ndarray:
    """Exact on-policy gradient: sum_s d(s) sum_a (d pi/d theta) Q(s, a)."""
    pi = softmax_probs(theta, mdp.n_states, mdp.n_actions)
    d = discounted_state_weighting(mdp, pi)
    return d @ _score_q_term(mdp, pi)


def _value_gradient(mdp: FiniteMdp, pi: np.ndarray) -> np.ndarray:
    """dV/dtheta as an (S, S*A) matrix: solves (I - gamma P_pi) dV = g."""
    g = _score_q_term(mdp, pi)
    p_pi = mdp.policy_transition_matrix(pi)
    return np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * p_pi, g)


def theorem3_gradient(mdp: FiniteMdp, theta: np.ndarray,
                      behavior_weighting: np.ndarray) -> np.ndarray:
    """Exact gradient of sum_s d_b(s) V^theta(s) with d_b held fixed."""
    pi = softmax_probs(theta, mdp.n_states, mdp.n_actions)
    return behavior_weighting @ _value_gradient(mdp, pi)


def degris_truncated_gradient(mdp: FiniteMdp, theta: np.ndarray,
                              behavior_weighting: np.ndarray) -> np.ndarray:
    """Same weighting but only the score-times-Q term: the classic truncation
    that ignores how theta changes the values downstream."""
    pi = softmax_probs(theta, mdp.n_states, mdp.n_actions)
    return behavior_weighting @ _score_q_term(mdp, pi)


@dataclass
class OracleReport:
    name: str
    thm1_maxerr: float
    thm3_maxerr: float
    degris_bias: float


def pg_theorem_oracle(mdp: FiniteMdp, theta: np.ndarray, theta_b: np.ndarray,
                      eps: float = 1e-5) -> OracleReport:
    """Compare both exact gradients against finite differences of their
    objectives and measure the truncation bias, for one MDP instance."""
    _check_size(mdp)
    theta = np.asarray(theta, dtype=DTYPE)
    pi_b = softmax_probs(theta_b, mdp.n_states, mdp.n_actions)
    d_b = exact_stationary_distribution(mdp, pi_b)

    g1 = theorem1_gradient(mdp, theta)
    fd1 = finite_diff(lambda th: start_objective(mdp, th), theta, eps=eps)
    thm1_maxerr = float(np.max(np.abs(g1 - fd1)))

    def off_policy_objective(th: np.ndarray) -> float:
        pi = softmax_probs(th, mdp.n_states, mdp.n_actions)
        q = exact_q_values(mdp, pi)
        return float(d_b @ (pi * q).sum(axis=1))

    g3 = theorem3_gradient(mdp, theta, d_b)
    fd3 = finite_diff(off_policy_objective, theta, eps=eps)
    thm3_maxerr = float(np.max(np.abs(g3 - fd3)))

    trunc = degris_truncated_gradient(mdp, theta, d_b)
    degris_bias = float(np.linalg.norm(trunc - g3))
    return OracleReport("", thm1_maxerr, thm3_maxerr, degris_bias)


def random_mdp(gen: np.random.Generator, n_states: int = 3, n_actions: int = 2,
               gamma: float = 0.9) -> FiniteMdp:
    """Random ergodic instance: transition rows mix a random draw with the
    uniform distribution so every state stays reachable."""
    raw = gen.uniform(0.05, 1.0, size=(n_states, n_actions, n_states))
    raw /= raw.sum(axis=2, keepdims=True)
    transitions = 0.9 * raw + 0.1 / n_states
    rewards = gen.normal(size=(n_states, n_actions))
    mu0 = gen.uniform(0.1, 1.0, size=n_states)
    mu0 /= mu0.sum()
    return FiniteMdp(transitions, rewards, mu0, gamma)


def degris_bias_example() -> tuple[FiniteMdp, np.ndarray, np.ndarray]:
    """Fixed two-state instance on which the truncated estimator is visibly
    biased: the behavior policy concentrates where the target policy's value
    changes fastest, so the dropped term is far from zero."""
    mdp = chain2_mdp(gamma=0.9)
    theta = np.array([1.5, -0.5, -1.0, 1.0])
    theta_b = np.array([-1.0, 1.0, 1.0, -1.0])
    return mdp, theta, theta_b


def run_oracle_suite(n_instances: int, seed: int, gamma: float = 0.9,
                     n_states: int = 3, n_actions: int = 2) -> list[OracleReport]:
    """chain2 first, then `n_instances` random MDPs with random softmax
    parameters for both target and behavior policies."""
    gen = np.random.default_rng(seed)
    reports = []

    mdp0 = chain2_mdp(gamma=gamma)
    th = gen.normal(size=mdp0.n_states * mdp0.n_actions)
    th_b = gen.normal(size=mdp0.n_states * mdp0.n_actions)
    rep = pg_theorem_oracle(mdp0, th, th_b)
    rep.name = "chain2"
    reports.append(rep)

    for k in range(n_instances):
        mdp = random_mdp(gen, n_states=n_states, n_actions=n_actions, gamma=gamma)
        th = gen.normal(size=n_states * n_actions)
        th_b = gen.normal(size=n_states * n_actions)
        rep = pg_theorem_oracle(mdp, th, th_b)
        rep.name = f"rand{k}"
        reports.append(rep)
    return reports
