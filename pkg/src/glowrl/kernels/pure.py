"""Pure-numpy fallback for the per-cycle hot path.

The compiled extension (``glowrl.kernels._core``) implements the same three
functions; this module is selected at import time when the extension is
unavailable or when GLOWRL_PURE=1 is set.  Both backends agree to ~1e-13,
which test_kernels.py pins down.

Algorithm: state coordinates ride in the eigenbasis of the current layer's
generator, so each layer costs one diagonal phase multiply plus one dense
basis hop.  The backward pass runs the adjoint suffix recursion
chi_{k-1} = U_k^dag chi_k and reads off gradient components as diagonal
inner products 2 Im <chi_k|H_k|psi_k> in the layer eigenbasis.
"""

from __future__ import annotations

import numpy as np


def forward(sd, h: np.ndarray, psi: np.ndarray):
    """Apply the layered memory to a pure state.

    Returns (phi, cache): phi = U(h) psi in computational-basis coordinates
    and cache[k] = eigenbasis coordinates of the k-th prefix state, which is
    exactly what the backward pass consumes.
    """
    n = h.shape[0]
    cache = np.empty((n, psi.shape[0]), dtype=complex)
    y = sd.vh[0] @ psi
    for j in range(n):
        b = j & 1
        y = np.exp(-1j * h[j] * sd.lam[b]) * y
        cache[j] = y
        if j < n - 1:
            y = sd.t[b] @ y
    phi = sd.v[(n - 1) & 1] @ y
    return phi, cache


def backward(sd, h: np.ndarray, cache: np.ndarray, phi: np.ndarray, pi: np.ndarray):
    """Gradient of <phi|Pi|phi> with respect to every layer strength."""
    n = h.shape[0]
    grad = np.empty(n)
    z = sd.vh[(n - 1) & 1] @ (pi @ phi)
    for j in range(n - 1, -1, -1):
        b = j & 1
        grad[j] = 2.0 * np.vdot(z, sd.lam[b] * cache[j]).imag
        if j > 0:
            z = np.exp(1j * h[j] * sd.lam[b]) * z
            z = sd.t[b] @ z
    return grad


def probabilities(phi: np.ndarray, povm: np.ndarray) -> np.ndarray:
    """Outcome probabilities <phi|Pi_a|phi> for a stacked POVM array (a, d, d)."""
    return np.einsum("i,aij,j->a", phi.conj(), povm, phi).real
