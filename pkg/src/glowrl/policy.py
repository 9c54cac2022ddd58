"""Percept-state encodings, POVM construction, and measurement-based policies.

Action ordering is fixed and documented per environment (invasion: move 0 =
left, move 1 = right; grid: right, down, left, up) so that sampling and CSV
columns are deterministic.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .linalg import check_density_matrix, kron

COMPLETENESS_ATOL = 1e-10
PSD_ATOL = 1e-10
NEGATIVE_PROB_ATOL = 1e-12


@dataclass(frozen=True)
class PovmSet:
    """Ordered measurement: one positive operator per action label.

    The operators must sum to the identity within 1e-10; construction fails
    otherwise, so a PovmSet in hand is always a complete measurement.
    validate=False is reserved for internal constructions that preserve the
    invariants exactly (e.g. conjugation by a unitary).
    """

    actions: tuple
    ops: np.ndarray  # stacked (n_actions, d, d), complex
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        ops = np.ascontiguousarray(np.asarray(self.ops, dtype=complex))
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "actions", tuple(self.actions))
        if len(self.actions) != ops.shape[0]:
            raise ValueError("one operator per action label required")
        if not validate:
            return
        d = ops.shape[1]
        for pi in ops:
            if np.abs(pi - pi.conj().T).max() > 1e-12:
                raise ValueError("povm element is not Hermitian")
            if np.linalg.eigvalsh(pi).min() < -PSD_ATOL:
                raise ValueError("povm element is not positive semidefinite")
        if np.linalg.norm(ops.sum(axis=0) - np.eye(d)) > COMPLETENESS_ATOL:
            raise ValueError("povm elements do not sum to identity")

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def __len__(self) -> int:
        return len(self.actions)


def plus_state(d: int) -> np.ndarray:
    """The uniform superposition (1/sqrt(d)) sum_a |a>."""
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def basis_projector(d: int, i: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    p[i, i] = 1.0
    return p


def encode_invasion_2x2(s: int, p_coh: float) -> np.ndarray:
    """Symbol-conditioned product state on dim 4: |s><s| (x) rho_A.

    The action register is a p_coh-weighted blend of the coherent uniform
    superposition and the maximally mixed state; p_coh = 1 is the pure input
    the learning task needs, p_coh = 0 kills the policy gradient entirely.
    """
    if not 0.0 <= p_coh <= 1.0:
        raise ValueError("p_coh must lie in [0, 1]")
    if s not in (0, 1):
        raise ValueError("symbol must be 0 or 1")
    phi = plus_state(2)
    rho_a = p_coh * np.outer(phi, phi.conj()) + (1.0 - p_coh) * np.eye(2) / 2.0
    return kron(basis_projector(2, s), rho_a)


def encode_invasion_4(j: int, k: int) -> np.ndarray:
    """Four orthonormal percepts on dim 4: |j><j| (x) |k><k| (symbol, color)."""
    if j not in (0, 1) or k not in (0, 1):
        raise ValueError("symbol and color must be 0 or 1")
    return kron(basis_projector(2, j), basis_projector(2, k))


def encode_neverending(s: int, rho_c: np.ndarray) -> np.ndarray:
    """Symbol (x) arbitrary color qubit (x) coherent action register, dim 8."""
    if s not in (0, 1):
        raise ValueError("symbol must be 0 or 1")
    check_density_matrix(rho_c, "rho_c")
    phi = plus_state(2)
    return kron(kron(basis_projector(2, s), rho_c), np.outer(phi, phi.conj()))


def povm_action_subsystem(dim_s: int, dim_a: int) -> PovmSet:
    """Projective readout of the action register: Pi(a) = I_S (x) |a><a|."""
    if dim_s < 1 or dim_a < 1:
        raise ValueError("dims must be >= 1")
    eye_s = np.eye(dim_s)
    ops = np.stack([kron(eye_s, basis_projector(dim_a, a)) for a in range(dim_a)])
    return PovmSet(actions=tuple(range(dim_a)), ops=ops)


def povm_rotated(u_t: np.ndarray, merge_colors: bool = False) -> PovmSet:
    """Measurement in the target-rotated basis: Pi_jk = U_T |jk><jk| U_T^dag.

    With merge_colors the color outcome is ignored, summing the pairs into
    two rank-2 projectors labeled by the symbol alone.
    """
    if u_t.shape != (4, 4) or np.linalg.norm(u_t.conj().T @ u_t - np.eye(4)) > 1e-10:
        raise ValueError("u_t must be a 4x4 unitary")
    ops = []
    labels = []
    for j in (0, 1):
        for k in (0, 1):
            p = u_t @ encode_invasion_4(j, k) @ u_t.conj().T
            ops.append(p)
            labels.append((j, k))
    if merge_colors:
        merged = [ops[0] + ops[1], ops[2] + ops[3]]
        return PovmSet(actions=(0, 1), ops=np.stack(merged))
    return PovmSet(actions=tuple(labels), ops=np.stack(ops))


def rotate_povm(povm: PovmSet, w: np.ndarray) -> PovmSet:
    """Conjugate every element by a unitary: Pi -> W Pi W^dag.

    Conjugation preserves positivity and completeness exactly, so the result
    skips re-validation (this sits on the per-cycle path of the random-basis
    invasion mode).
    """
    ops = np.einsum("ij,ajk,lk->ail", w, povm.ops, w.conj())
    return PovmSet(actions=povm.actions, ops=ops, validate=False)


def _sanitize_probs(p: np.ndarray) -> np.ndarray:
    if p.min() < -NEGATIVE_PROB_ATOL:
        raise ValueError(f"negative outcome probability {p.min():g}: broken POVM")
    if abs(p.sum() - 1.0) > COMPLETENESS_ATOL:
        raise ValueError(f"outcome probabilities sum to {p.sum()!r}: incomplete POVM")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def action_distribution(snap, rho: np.ndarray, povm: PovmSet):
    """Policy induced by memory, encoding and measurement: p(a) = Tr[U rho U^dag Pi(a)].

    ``snap`` may be a MemorySnapshot or a bare unitary.  Tiny negative
    probabilities from roundoff are clipped and the distribution is
    renormalized exactly; anything worse raises.
    """
    u = getattr(snap, "U", snap)
    if rho.shape[0] != povm.dim or u.shape[0] != povm.dim:
        raise ValueError("state, memory and povm dimensions disagree")
    out = u @ rho @ u.conj().T
    p = np.einsum("aij,ji->a", povm.ops, out).real
    p = _sanitize_probs(p)
    return list(zip(povm.actions, p.tolist()))


def sample_action(dist, rng):
    """Inverse-CDF draw in the listed action order."""
    labels = [a for a, _ in dist]
    p = np.array([x for _, x in dist])
    idx = sample_index(p, rng)
    return labels[idx]


def sample_index(p: np.ndarray, rng) -> int:
    u = rng.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, len(p) - 1)
