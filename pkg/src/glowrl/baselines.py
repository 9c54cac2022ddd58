"""Classical comparison methods: basic projective-simulation (PS) tables,
tabular TD(lambda)/SARSA(lambda), gradient-ascent RL over arbitrary features,
the tabular policy-gradient traces of the measurement-based rule, and the
random-walk control.

Conventions shared by the tabular methods: tables are (n_states, n_actions)
float arrays indexed by integer state and action ids; updates mutate in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class EdgeTable:
    """PS edge strengths h(s, a) with glow g(s, a) and damping toward h_eq."""

    n_states: int
    n_actions: int
    gamma_damp: float = 0.0
    h_eq: float = 1.0
    eta: float = 1.0
    policy_kind: str = "linear"  # or "softmax"
    h: np.ndarray = field(init=False)
    g: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.policy_kind not in ("linear", "softmax"):
            raise ValueError("policy_kind must be 'linear' or 'softmax'")
        self.h = np.full((self.n_states, self.n_actions), float(self.h_eq))
        self.g = np.zeros((self.n_states, self.n_actions))


def ps_update(table: EdgeTable, s: int, a: int, reward: float):
    """One PS cycle: set glow on the visited edge, excite, damp, decay glow.

    h <- (1 - gamma) h + reward * g + gamma * h_eq elementwise, with the
    visited pair's glow pinned to 1 first; afterwards g <- (1 - eta) g.
    """
    table.g[s, a] = 1.0
    table.h *= 1.0 - table.gamma_damp
    table.h += reward * table.g
    table.h += table.gamma_damp * table.h_eq
    table.g *= 1.0 - table.eta


def ps_policy(table: EdgeTable, s: int) -> np.ndarray:
    """Action distribution from the edge strengths of state s."""
    row = table.h[s]
    if table.policy_kind == "softmax":
        w = np.exp(row - row.max())
    else:
        w = row
    c = w.sum()
    if c <= 0.0:
        raise ValueError(f"degenerate row for state {s}: normalization {c!r}")
    return w / c


@dataclass
class ValueTable:
    """SARSA(lambda)/TD(lambda) value estimates with eligibility traces.

    ``values`` is Q(s, a) for SARSA (2-d) or V(s) for TD (1-d); the trace
    array always matches its shape and starts at zero.
    """

    values: np.ndarray
    alpha: float
    gamma_disc: float
    lam: float
    trace_kind: str = "accumulating"  # or "replacing"
    e: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.trace_kind not in ("accumulating", "replacing"):
            raise ValueError("trace_kind must be 'accumulating' or 'replacing'")
        self.values = np.asarray(self.values, dtype=float)
        self.e = np.zeros_like(self.values)

    def reset_episode(self):
        self.e[:] = 0.0


def sarsa_lambda_update(table: ValueTable, s: int, a: int, r: float,
                        s_next: int, a_next: int, terminal: bool):
    """On-policy SARSA(lambda) backup over the whole trace.

    e(s,a) is bumped (or pinned, for replacing traces), every entry moves by
    alpha * [r + gamma Q' - Q] * e, then the trace decays by gamma * lambda.
    """
    if table.trace_kind == "replacing":
        table.e[s, a] = 1.0
    else:
        table.e[s, a] += 1.0
    q_next = 0.0 if terminal else table.values[s_next, a_next]
    delta = r + table.gamma_disc * q_next - table.values[s, a]
    table.values += table.alpha * delta * table.e
    table.e *= table.gamma_disc * table.lam


def gradient_rl_update(theta: np.ndarray, e_vec: np.ndarray, grad_u: np.ndarray,
                       r: float, u: float, u_prime: float,
                       alpha: float, gamma: float, lam: float):
    """Gradient-ascent TD update over arbitrary value parametrizations.

    e <- gamma lambda e + grad U; theta <- theta + alpha [r + gamma U' - U] e.
    With one-hot features this reproduces the tabular SARSA(lambda) update
    exactly.  Mutates theta and e_vec in place.
    """
    if theta.shape != e_vec.shape or theta.shape != grad_u.shape:
        raise ValueError("theta, trace and gradient must share a shape")
    e_vec *= gamma * lam
    e_vec += grad_u
    theta += alpha * (r + gamma * u_prime - u) * e_vec


def tabular_pg_trace(h: np.ndarray, policy_kind: str, i: int, j: int) -> np.ndarray:
    """Full table of policy-probability derivatives d p(a_j|s_i) / d h(k, l).

    Only row k = i is nonzero: the rewarded edge strengthens while the
    sibling actions of the visited state weaken, which is what distinguishes
    the gradient update from plain PS excitation.
    """
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    row = h[i]
    if policy_kind == "softmax":
        w = np.exp(row)
        wp = w
    elif policy_kind == "linear":
        w = row
        wp = np.ones_like(row)
    else:
        raise ValueError("policy_kind must be 'linear' or 'softmax'")
    c = w.sum()
    if c <= 0.0:
        raise ValueError(f"degenerate row for state {i}")
    delta_jl = np.zeros_like(row)
    delta_jl[j] = 1.0
    out[i] = wp * (delta_jl * c - w[j]) / c**2
    return out


def random_walk_policy(s, n_actions: int = 4) -> np.ndarray:
    """Uniform distribution over actions; the learning-disabled control."""
    del s  # same policy everywhere
    return np.full(n_actions, 1.0 / n_actions)
