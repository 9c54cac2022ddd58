"""The glow-equipped gradient agent.

Per cycle the agent encodes the percept, transforms it with its current
memory unitary, samples an action from the measurement outcome distribution,
and folds the analytic gradient of the sampled outcome's probability into a
decaying eligibility trace:

    e <- (1 - eta) e + grad p(a|s)         (trace update, on step)
    h <- h + alpha r e + kappa (h_inf - h) (control update, on reward)

eta = 1 recovers the memoryless rule h <- h + alpha r grad p(a|s).  kappa
defaults to 0 (static environments); h_inf defaults to the initial controls.

Evaluations are memoized per percept key until the controls actually move
(zero reward leaves h untouched), which matters in episodic tasks where the
same few percepts recur many times between updates.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .memory import HamiltonianStack, MemorySnapshot, build_snapshot, rank_decompose
from .policy import PovmSet, _sanitize_probs, sample_index


class GlowAgent:
    """Mutable learner state: controls h, eligibility trace e, hyperparameters."""

    def __init__(
        self,
        stack: HamiltonianStack,
        alpha: float,
        eta: float = 1.0,
        kappa: float = 0.0,
        h0: np.ndarray | None = None,
        h_inf: np.ndarray | None = None,
    ):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 0.0 <= eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if not 0.0 <= kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        self.stack = stack
        self.alpha = float(alpha)
        self.eta = float(eta)
        self.kappa = float(kappa)
        self.h = np.zeros(stack.n) if h0 is None else np.array(h0, dtype=float)
        if self.h.shape != (stack.n,):
            raise ValueError("h0 length must equal the stack's control count")
        self.h_inf = self.h.copy() if h_inf is None else np.array(h_inf, dtype=float)
        self.e = np.zeros(stack.n)
        self._sd = kernels.StackData.from_stack(stack)
        self._eval_cache = {}
        self._grad_cache = {}

    def reset_episode(self):
        """Zero the eligibility trace at an episode boundary (idempotent)."""
        self.e[:] = 0.0

    def observe_gradient(self, grad: np.ndarray):
        """Fold one cycle's policy gradient into the glow trace."""
        grad = np.asarray(grad, dtype=float)
        if grad.shape != self.e.shape:
            raise ValueError("gradient length does not match the trace")
        self.e *= 1.0 - self.eta
        self.e += grad

    def apply_reward(self, r: float):
        """Control update for the reward received at the end of the cycle."""
        moved = False
        if self.alpha != 0.0 and r != 0.0:
            self.h += (self.alpha * r) * self.e
            moved = True
        if self.kappa != 0.0:
            self.h += self.kappa * (self.h_inf - self.h)
            moved = True
        if moved:
            self._eval_cache.clear()
            self._grad_cache.clear()

    def snapshot(self) -> MemorySnapshot:
        return build_snapshot(self.stack, self.h)

    def _evaluate(self, rho_s, povm: PovmSet, components=None, key=None):
        if key is not None and key in self._eval_cache:
            return self._eval_cache[key]
        # components: optional precomputed (weights, eigenvector columns) of
        # rho_s, so frequently reused percept states skip the eigh call
        weights, vecs = rank_decompose(rho_s) if components is None else components
        phis = []
        caches = []
        probs = np.zeros(len(povm))
        for i, w in enumerate(weights):
            phi, cache = kernels.forward(self._sd, self.h, np.ascontiguousarray(vecs[:, i]))
            phis.append(phi)
            caches.append(cache)
            probs += w * kernels.probabilities(phi, povm.ops)
        out = (weights, phis, caches, _sanitize_probs(probs))
        if key is not None:
            self._eval_cache[key] = out
        return out

    def policy_distribution(self, rho_s, povm: PovmSet, components=None, key=None) -> np.ndarray:
        """Outcome probabilities under the current memory, without side effects."""
        _, _, _, probs = self._evaluate(rho_s, povm, components, key)
        return probs

    def step(self, rho_s, povm: PovmSet, rng, components=None, key=None):
        """One percept-action cycle: sample an action and record its gradient.

        Returns (action label, outcome distribution).  The reward is applied
        separately via apply_reward once the environment has produced it.
        ``key``, when given, must uniquely name the percept so repeat visits
        between control updates reuse the evaluation.
        """
        weights, phis, caches, probs = self._evaluate(rho_s, povm, components, key)
        idx = sample_index(probs, rng)
        gkey = None if key is None else (key, idx)
        grad = self._grad_cache.get(gkey) if gkey is not None else None
        if grad is None:
            pi_a = povm.ops[idx]
            grad = np.zeros(self.stack.n)
            for w, phi, cache in zip(weights, phis, caches):
                grad += w * kernels.backward(self._sd, self.h, cache, phi, pi_a)
            if gkey is not None:
                self._grad_cache[gkey] = grad
        self.observe_gradient(grad)
        return povm.actions[idx], probs
