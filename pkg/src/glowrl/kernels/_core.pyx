# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-cycle kernels: layered-unitary forward/backward passes.

Mirrors glowrl.kernels.pure exactly; BLAS zgemv does the dense basis hops,
plain C loops do the diagonal phase multiplies and gradient reductions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()

ctypedef double complex zdouble

cdef zdouble Z_ONE = 1.0 + 0.0j
cdef zdouble Z_ZERO = 0.0 + 0.0j


cdef inline void _gemv(zdouble* a, zdouble* x, zdouble* y, int d) noexcept nogil:
    # y = A @ x for a row-major (d, d) matrix A: row-major A is col-major A^T,
    # so BLAS sees op(A^T) with op = 'T'.
    cdef char trans = b'T'
    cdef int inc = 1
    zgemv(&trans, &d, &d, &Z_ONE, a, &d, x, &inc, &Z_ZERO, y, &inc)


def forward(object sd, double[::1] h, zdouble[::1] psi):
    """Compiled twin of kernels.pure.forward."""
    cdef double[:, ::1] lam = sd.lam
    cdef zdouble[:, :, ::1] v = sd.v
    cdef zdouble[:, :, ::1] vh = sd.vh
    cdef zdouble[:, :, ::1] t = sd.t
    cdef int n = h.shape[0]
    cdef int d = psi.shape[0]

    cache_arr = np.empty((n, d), dtype=np.complex128)
    phi_arr = np.empty(d, dtype=np.complex128)
    cdef zdouble[:, ::1] cache = cache_arr
    cdef zdouble[::1] phi = phi_arr
    buf_a = np.empty(d, dtype=np.complex128)
    buf_b = np.empty(d, dtype=np.complex128)
    cdef zdouble[::1] ya = buf_a
    cdef zdouble[::1] yb = buf_b

    cdef zdouble* y = &ya[0]
    cdef zdouble* w = &yb[0]
    cdef zdouble* tmp
    cdef int j, i, b
    cdef double ph

    _gemv(&vh[0, 0, 0], &psi[0], y, d)
    for j in range(n):
        b = j & 1
        for i in range(d):
            ph = -h[j] * lam[b, i]
            y[i] = y[i] * (cos(ph) + 1j * sin(ph))
            cache[j, i] = y[i]
        if j < n - 1:
            _gemv(&t[b, 0, 0], y, w, d)
            tmp = y
            y = w
            w = tmp
    _gemv(&v[(n - 1) & 1, 0, 0], y, &phi[0], d)
    return phi_arr, cache_arr


def backward(object sd, double[::1] h, zdouble[:, ::1] cache, zdouble[::1] phi,
             zdouble[:, ::1] pi):
    """Compiled twin of kernels.pure.backward."""
    cdef double[:, ::1] lam = sd.lam
    cdef zdouble[:, :, ::1] vh = sd.vh
    cdef zdouble[:, :, ::1] t = sd.t
    cdef int n = h.shape[0]
    cdef int d = phi.shape[0]

    grad_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    buf_a = np.empty(d, dtype=np.complex128)
    buf_b = np.empty(d, dtype=np.complex128)
    buf_c = np.empty(d, dtype=np.complex128)
    cdef zdouble[::1] za = buf_a
    cdef zdouble[::1] zb = buf_b
    cdef zdouble[::1] zc = buf_c

    cdef zdouble* z = &za[0]
    cdef zdouble* w = &zb[0]
    cdef zdouble* tmp
    cdef int j, i, b
    cdef double ph, acc
    cdef zdouble prod

    _gemv(&pi[0, 0], &phi[0], &zc[0], d)
    _gemv(&vh[(n - 1) & 1, 0, 0], &zc[0], z, d)
    for j in range(n - 1, -1, -1):
        b = j & 1
        acc = 0.0
        for i in range(d):
            prod = z[i].conjugate() * cache[j, i]
            acc += lam[b, i] * prod.imag
        grad[j] = 2.0 * acc
        if j > 0:
            for i in range(d):
                ph = h[j] * lam[b, i]
                z[i] = z[i] * (cos(ph) + 1j * sin(ph))
            _gemv(&t[b, 0, 0], z, w, d)
            tmp = z
            z = w
            w = tmp
    return grad_arr
