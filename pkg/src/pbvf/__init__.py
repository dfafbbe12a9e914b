"""Parameter-based value function laboratory.

Critics that take policy weights as input (episodic, state-conditioned and
state-action-conditioned variants), the actor-critic loops built on them, a
random-search baseline, small fully-observed environments with exact oracles,
and an experiment harness that writes CSV artifacts. An HTTP service wraps
the harness; the `pbvf` CLI is a thin client for it.
"""

__version__ = "0.1.0"
