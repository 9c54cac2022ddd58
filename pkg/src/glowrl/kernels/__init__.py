"""Per-cycle hot-path kernels with a compiled core and a pure-numpy fallback.

``BACKEND`` records which implementation got picked at import: the Cython
extension unless it failed to build/import or the environment variable
GLOWRL_PURE=1 forces the fallback.  ``benchmarks/bench_kernels.py`` compares
the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import pure

if os.environ.get("GLOWRL_PURE") == "1":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"


@dataclass(frozen=True)
class StackData:
    """Contiguous eigendata of an alternating-layer stack, kernel-ready.

    lam[b] holds the eigenvalues of generator b, v[b]/vh[b] its eigenvector
    matrix and adjoint, and t[b] the fixed hop taking coordinates in basis b
    to coordinates in basis 1-b.
    """

    dim: int
    lam: np.ndarray  # (2, d) float64
    v: np.ndarray  # (2, d, d) complex128
    vh: np.ndarray  # (2, d, d) complex128
    t: np.ndarray  # (2, d, d) complex128

    @classmethod
    def from_stack(cls, stack) -> "StackData":
        d = stack.dim
        lam = np.empty((2, d))
        v = np.empty((2, d, d), dtype=complex)
        for b in range(2):
            lam[b], v[b] = stack.layer_eig(b)
        vh = np.ascontiguousarray(v.conj().transpose(0, 2, 1))
        t = np.empty((2, d, d), dtype=complex)
        t[0] = vh[1] @ v[0]
        t[1] = vh[0] @ v[1]
        return cls(dim=d, lam=lam, v=v, vh=vh, t=t)


def forward(sd: StackData, h: np.ndarray, psi: np.ndarray):
    return _impl.forward(sd, h, psi)


def backward(sd: StackData, h: np.ndarray, cache: np.ndarray, phi: np.ndarray, pi: np.ndarray):
    return _impl.backward(sd, h, cache, phi, pi)


def probabilities(phi: np.ndarray, povm: np.ndarray) -> np.ndarray:
    return pure.probabilities(phi, povm)
