"""Model-free substitutes for the analytic policy gradient.

Three estimators, in increasing statistical ambition: finite differences of
exact outcome probabilities, finite differences of single-shot binary
outcomes, and a neural-gas style cloud average of signed control offsets.
Each oracle query models one internal memory cycle, so callers can account
internal against external cycles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .memory import HamiltonianStack, build_snapshot
from .policy import PovmSet, action_distribution


@dataclass
class CloudConfig:
    """Gaussian sampling cloud around the current controls."""

    n_samples: int
    sigma: float
    sigma_decay: float = 1.0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("need at least two cloud samples")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.sigma_decay <= 1.0:
            raise ValueError("sigma_decay must lie in (0, 1]")

    def decayed(self, cycles: int) -> float:
        """Cloud width after the given number of external cycles."""
        return self.sigma * self.sigma_decay**cycles


def binary_outcome_oracle(stack: HamiltonianStack, rho_s: np.ndarray,
                          povm: PovmSet, target_action):
    """Single-shot oracle: prepare rho(s), run U(h), measure; +1 iff the
    target outcome occurred.  Its expectation is 2 p(a|s; h) - 1.
    """
    idx = povm.actions.index(target_action)

    def oracle(h: np.ndarray, rng) -> int:
        dist = action_distribution(build_snapshot(stack, h), rho_s, povm)
        u = rng.random()
        acc = 0.0
        for k, (_, p) in enumerate(dist):
            acc += p
            if u < acc:
                return 1 if k == idx else -1
        return 1 if len(dist) - 1 == idx else -1

    return oracle


def probability_evaluator(stack: HamiltonianStack, rho_s: np.ndarray,
                          povm: PovmSet, target_action):
    """Exact p(a|s; h) as a function of the controls (expectation-value loop)."""
    idx = povm.actions.index(target_action)

    def p_eval(h: np.ndarray) -> float:
        dist = action_distribution(build_snapshot(stack, h), rho_s, povm)
        return dist[idx][1]

    return p_eval


def fd_gradient_expectation(p_eval, h: np.ndarray, delta: float) -> np.ndarray:
    """Forward-difference gradient of an exact probability evaluator.

    One extra evaluation per component: [p(h + delta e_k) - p(h)] / delta.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    h = np.asarray(h, dtype=float)
    base = p_eval(h)
    g = np.empty(h.shape[0])
    for k in range(h.shape[0]):
        shifted = h.copy()
        shifted[k] += delta
        g[k] = (p_eval(shifted) - base) / delta
    return g


def fd_gradient_samples(oracle, h: np.ndarray, delta: float, m: int, rng) -> np.ndarray:
    """Sample-based finite differences from paired single-shot outcomes.

    Per component: mean over m paired draws of [s(h + delta e_k) - s(h)] / 2,
    divided by delta.  Pairing the base and displaced draws within a cycle
    keeps the variance down; the estimator is unbiased for the finite
    difference of the oracle's mean function.
    """
    if m < 1:
        raise ValueError("need at least one sample per point")
    h = np.asarray(h, dtype=float)
    n = h.shape[0]
    g = np.zeros(n)
    for k in range(n):
        shifted = h.copy()
        shifted[k] += delta
        acc = 0.0
        for _ in range(m):
            acc += oracle(shifted, rng) - oracle(h, rng)
        g[k] = acc / (2.0 * m * delta)
    return g


def neural_gas_difference(oracle, h_center: np.ndarray, cfg: CloudConfig, rng) -> np.ndarray:
    """Signed cloud average pointing from negative toward positive outcomes.

    Draws cloud points h_k ~ N(h_center, sigma^2 I), queries the one-shot
    oracle at each, and keeps the running mean of s_k (h_k - h_center).
    Subtracting the center makes the estimate translation-covariant, which
    is what the difference between positive and negative outcome centers
    requires; the incremental form D_n = (n-1)/n D_{n-1} + s_n (h_n - h_c)/n
    is used verbatim.
    """
    h_center = np.asarray(h_center, dtype=float)
    d = np.zeros(h_center.shape[0])
    for n in range(1, cfg.n_samples + 1):
        point = h_center + cfg.sigma * rng.normal(size=h_center.shape[0])
        s = oracle(point, rng)
        d *= (n - 1) / n
        d += (s / n) * (point - h_center)
    return d
