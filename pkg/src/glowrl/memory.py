"""The agent's parametrized unitary memory.

A memory is a product of layers U = U_n ... U_2 U_1 with U_k = exp(-i h_k H_k),
where the layer generators alternate between two fixed Hermitian matrices
(H1 on layers 1, 3, 5, ..., H2 on layers 2, 4, ...).  The controls h_k are
identified directly with the evolution times, negative values included; there
is no exponential reparametrization.

Snapshots cache the prefix products U_k...U_1, which carry everything the
analytic policy gradient needs.  Prefixes are recomputed from scratch on every
update; at dim <= 32 and n <= 128 the cost is negligible and the recomputation
sidesteps drift from incremental updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    check_density_matrix,
    kron,
    random_hermitian,
    require_hermitian,
)

PSD_ATOL = 1e-10


@dataclass(frozen=True)
class HamiltonianStack:
    """Alternating-layer generator set: n controls over two fixed Hamiltonians."""

    dim: int
    ham1: np.ndarray
    ham2: np.ndarray
    n: int
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require_hermitian(self.ham1, "ham1")
        require_hermitian(self.ham2, "ham2")
        if self.ham1.shape != (self.dim, self.dim) or self.ham2.shape != (self.dim, self.dim):
            raise ValueError("layer Hamiltonians must match the stack dimension")
        if self.n < 1:
            raise ValueError("need at least one control")
        eig = tuple(np.linalg.eigh(h) for h in (self.ham1, self.ham2))
        object.__setattr__(self, "_eig", eig)

    def layer_hamiltonian(self, k: int) -> np.ndarray:
        """Generator of layer k (0-based): H1 on even k, H2 on odd k."""
        return self.ham1 if k % 2 == 0 else self.ham2

    def layer_eig(self, k: int):
        return self._eig[k % 2]


@dataclass(frozen=True)
class MemorySnapshot:
    """Full product U plus the cached prefix products U_k...U_1, k = 1..n."""

    U: np.ndarray
    prefixes: tuple


def build_snapshot(stack: HamiltonianStack, h: np.ndarray) -> MemorySnapshot:
    """Compose the layer exponentials and cache every prefix product.

    h == 0 layers contribute the exact identity, so the initial memory
    U(h=0) is the identity with no roundoff residue.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != (stack.n,):
        raise ValueError(f"control vector has length {h.shape}, stack expects {stack.n}")
    if not np.all(np.isfinite(h)):
        raise ValueError("control vector has non-finite entries")
    u = np.eye(stack.dim, dtype=complex)
    prefixes = []
    for k in range(stack.n):
        if h[k] != 0.0:
            lam, vec = stack.layer_eig(k)
            layer = (vec * np.exp(-1j * h[k] * lam)) @ vec.conj().T
            u = layer @ u
        prefixes.append(u)
    return MemorySnapshot(U=u, prefixes=tuple(prefixes))


def _require_povm_element(pi: np.ndarray, dim: int):
    require_hermitian(pi, "povm element")
    ev = np.linalg.eigvalsh(pi)
    if ev.min() < -PSD_ATOL or ev.max() > 1.0 + PSD_ATOL:
        raise ValueError("povm element must satisfy 0 <= Pi <= I")
    if pi.shape != (dim, dim):
        raise ValueError("povm element dimension mismatch")


def gradient_fixed_layers(
    snap: MemorySnapshot,
    stack: HamiltonianStack,
    rho_s: np.ndarray,
    pi_a: np.ndarray,
    validate: bool = True,
) -> np.ndarray:
    """Analytic gradient of p(a|s) = Tr[U rho U^dag Pi] for the layered memory.

    Component k equals 2 Im Tr[rho (U^dag Pi U) (P_k^dag H_k P_k)] with P_k the
    k-th prefix product; this is the exact derivative of the outcome
    probability with respect to the layer strength h_k.
    """
    if validate:
        check_density_matrix(rho_s, "rho_s")
        _require_povm_element(pi_a, stack.dim)
    u = snap.U
    back = u.conj().T @ pi_a @ u
    g = np.empty(stack.n)
    for k, p in enumerate(snap.prefixes):
        hk = p.conj().T @ stack.layer_hamiltonian(k) @ p
        g[k] = 2.0 * np.trace(rho_s @ back @ hk).imag
    return g


def gradient_add_layer(
    u: np.ndarray, ham_k: np.ndarray, rho_s: np.ndarray, pi_a: np.ndarray,
    validate: bool = True,
) -> float:
    """Derivative of p(a|s) for a fresh layer exp(-i dh H_k) prepended to U.

    Used when only the present memory U is stored, not the layer history;
    the value is 2 Im Tr[rho U^dag Pi H_k U] (the small-layer limit of the
    exact integral form).
    """
    if validate:
        require_hermitian(ham_k, "ham_k")
        check_density_matrix(rho_s, "rho_s")
        _require_povm_element(pi_a, u.shape[0])
    return float(2.0 * np.trace(rho_s @ u.conj().T @ pi_a @ ham_k @ u).imag)


def case_I_hamiltonians(dim: int, rng):
    """Two independent random Hermitians on the full space (the general case)."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return random_hermitian(dim, rng), random_hermitian(dim, rng)


def case_II_hamiltonians(dim_s: int, dim_a: int, rng):
    """Tensor-structured pair: local fields plus a product interaction.

    H1 = Hs1 x I + I x Ha1 (local terms), H2 = Hs2 x Ha2 (interaction), from
    four independent random Hermitians on the two subsystems.
    """
    if dim_s < 2 or dim_a < 2:
        raise ValueError("subsystem dims must be >= 2")
    hs1 = random_hermitian(dim_s, rng)
    ha1 = random_hermitian(dim_a, rng)
    hs2 = random_hermitian(dim_s, rng)
    ha2 = random_hermitian(dim_a, rng)
    h1 = kron(hs1, np.eye(dim_a)) + kron(np.eye(dim_s), ha1)
    h2 = kron(hs2, ha2)
    return h1, h2


def schmidt_orthonormalize(h1: np.ndarray, h2: np.ndarray):
    """Gram-Schmidt the pair under the Hilbert-Schmidt inner product.

    Both outputs are rescaled to Frobenius norm sqrt(dim); the second has its
    component along the first removed, so Tr(H1'^dag H2') = 0.
    """
    if h1.shape != h2.shape:
        raise ValueError("Hamiltonians must share a dimension")
    n = h1.shape[0]
    scale = np.sqrt(n)
    g1 = h1 * (scale / np.linalg.norm(h1))
    overlap = np.trace(g1.conj().T @ h2) / np.trace(g1.conj().T @ g1)
    residual = h2 - overlap.real * g1
    rnorm = np.linalg.norm(residual)
    if rnorm < 1e-12 * np.linalg.norm(h2):
        raise ValueError("H2 is parallel to H1; cannot orthonormalize")
    g2 = residual * (scale / rnorm)
    return g1, g2


def rank_decompose(rho: np.ndarray, tol: float = 1e-14):
    """Spectral decomposition of a density matrix, dropping zero weights.

    Returns (weights, vectors) with vectors as columns; the fast pure-state
    evaluation path runs once per retained component.
    """
    lam, vec = np.linalg.eigh(rho)
    keep = lam > tol
    return lam[keep], vec[:, keep]
