#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-numpy fallback.

Times one forward+backward pass per cycle at the two scales that matter in
practice: the dim-4 invasion game and the dim-32 grid world.  Run:

    python3 benchmarks/bench_kernels.py [reps]
"""

import sys
import time

import numpy as np

from glowrl import kernels
from glowrl.kernels import StackData, pure
from glowrl.linalg import RngStream
from glowrl.memory import HamiltonianStack, case_I_hamiltonians

try:
    from glowrl.kernels import _core
except ImportError:
    _core = None


def time_backend(mod, sd, h, psi, pi, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        phi, cache = mod.forward(sd, h, psi)
        mod.backward(sd, h, cache, phi, pi)
    return (time.perf_counter() - t0) / reps * 1e6


def main():
    reps = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    print(f"selected backend: {kernels.BACKEND}")
    print(f"{'scale':>16} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for dim, n in ((4, 16), (32, 64)):
        rng = RngStream(1, 0).generator()
        h1, h2 = case_I_hamiltonians(dim, rng)
        stack = HamiltonianStack(dim=dim, ham1=h1, ham2=h2, n=n)
        sd = StackData.from_stack(stack)
        h = rng.normal(size=n)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi = np.ascontiguousarray(psi / np.linalg.norm(psi))
        pi = np.zeros((dim, dim), dtype=complex)
        pi[: dim // 2, : dim // 2] = np.eye(dim // 2)

        t_pure = time_backend(pure, sd, h, psi, pi, reps)
        if _core is not None:
            t_core = time_backend(_core, sd, h, psi, pi, reps)
            print(f"d={dim:<3} n={n:<8} {t_pure:9.1f} us {t_core:9.1f} us {t_pure / t_core:8.1f}x")
        else:
            print(f"d={dim:<3} n={n:<8} {t_pure:9.1f} us {'n/a':>12} {'':>9}")

        # the two backends must agree on every number they produce
        phi_p, cache_p = pure.forward(sd, h, psi)
        g_p = pure.backward(sd, h, cache_p, phi_p, pi)
        if _core is not None:
            phi_c, cache_c = _core.forward(sd, h, psi)
            g_c = _core.backward(sd, h, cache_c, phi_c, pi)
            assert np.abs(phi_p - phi_c).max() < 1e-12
            assert np.abs(g_p - g_c).max() < 1e-12


if __name__ == "__main__":
    main()
