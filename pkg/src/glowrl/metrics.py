"""Distance and fidelity objectives for tracking memory navigation.

All of these reduce to functions of the overlap trace Tr(U_T^dag U) in the
unitary case; the channel variants take a Kraus decomposition.  Used for
post-hoc analysis of training runs, never inside the learning loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TP_ATOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """Trace-preserving channel as an ordered list of Kraus operators."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(g, dtype=complex) for g in self.operators)
        object.__setattr__(self, "operators", ops)
        d = ops[0].shape[0]
        acc = np.zeros((d, d), dtype=complex)
        for g in ops:
            if g.shape != (d, d):
                raise ValueError("Kraus operators must share a square shape")
            acc += g.conj().T @ g
        if np.linalg.norm(acc - np.eye(d)) > TP_ATOL:
            raise ValueError("Kraus operators do not satisfy trace preservation")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho, dtype=complex)
        for g in self.operators:
            out += g @ rho @ g.conj().T
        return out


def _check_same_dim(u: np.ndarray, u_t: np.ndarray) -> int:
    if u.shape != u_t.shape or u.shape[0] != u.shape[1]:
        raise ValueError("unitaries must share a square shape")
    return u.shape[0]


def distance_sq(u: np.ndarray, u_t: np.ndarray) -> float:
    """Squared Euclidean (Hilbert-Schmidt) distance: 2n - 2 Re Tr(U_T^dag U).

    Ranges over [0, 4n]; the extremes are attained at U = +/- U_T, so a
    global phase costs the full 4n here (unlike the fidelity below).
    """
    n = _check_same_dim(u, u_t)
    return float(2.0 * n - 2.0 * np.trace(u_t.conj().T @ u).real)


def avg_fidelity(u: np.ndarray, u_t: np.ndarray) -> float:
    """Uniform state-average fidelity (n + |Tr(U_T^dag U)|^2) / (n (n + 1))."""
    n = _check_same_dim(u, u_t)
    return float((n + abs(np.trace(u_t.conj().T @ u)) ** 2) / (n * (n + 1)))


def subspace_fidelity(u: np.ndarray, u_t: np.ndarray, p: np.ndarray) -> float:
    """State-average fidelity restricted to the range of a projector P.

    With M = P U_T^dag U P the value is [Tr(M^dag M) + |Tr M|^2] / (d(d+1)),
    d = rank P; d = n recovers avg_fidelity and rank-1 P gives the plain
    overlap probability of the projected state.
    """
    n = _check_same_dim(u, u_t)
    if p.shape != (n, n) or np.linalg.norm(p @ p - p) > 1e-10 or np.linalg.norm(p - p.conj().T) > 1e-10:
        raise ValueError("p must be an orthogonal projector")
    d = int(round(np.trace(p).real))
    if d < 1:
        raise ValueError("projector rank must be >= 1")
    m = p @ u_t.conj().T @ u @ p
    return float((np.trace(m.conj().T @ m).real + abs(np.trace(m)) ** 2) / (d * (d + 1)))


def channel_fidelity(channel: KrausChannel, u_t: np.ndarray) -> float:
    """State-average fidelity of a channel against a target unitary.

    (n + sum_k |Tr(U_T^dag G_k)|^2) / (n (n + 1)); invariant under unitary
    remixing of the Kraus operators.
    """
    n = channel.dim
    if u_t.shape != (n, n):
        raise ValueError("target dimension mismatch")
    s = sum(abs(np.trace(u_t.conj().T @ g)) ** 2 for g in channel.operators)
    return float((n + s) / (n * (n + 1)))


def percept_fidelity(channel: KrausChannel, u_t: np.ndarray, inputs) -> float:
    """Detection probability of target-transformed inputs, weighted by occurrence.

    inputs: iterable of (state vector, probability); the probabilities must
    form a distribution.  Rare inputs barely move the value, which is the
    point: the objective only cares about typical percepts.
    """
    inputs = [(np.asarray(v, dtype=complex), float(p)) for v, p in inputs]
    total = sum(p for _, p in inputs)
    if any(p < 0 for _, p in inputs) or abs(total - 1.0) > 1e-10:
        raise ValueError("input probabilities must form a distribution")
    val = 0.0
    for vec, p in inputs:
        if p == 0.0:
            continue
        out = channel.apply(np.outer(vec, vec.conj()))
        target = u_t @ vec
        val += p * np.real(target.conj() @ out @ target)
    return float(val)


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel(operators=(u,))
