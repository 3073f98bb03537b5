# cython: language_level=3
"""Compiled inner loops.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature; ``genre_haar._backend`` picks one at import time.  Line kernels
operate along the last axis of a C-contiguous 2-D array with circular
indexing.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

ctypedef fused num_t:
    double
    cnp.int64_t


def box_sum(num_t[:, ::1] x, Py_ssize_t L):
    """Circular running sum of length ``L``: y(n) = y(n-1) - x(n-L) + x(n)."""
    cdef Py_ssize_t M = x.shape[0], N = x.shape[1]
    cdef Py_ssize_t i, n, k
    cdef num_t acc
    out_np = np.empty((M, N), dtype=np.float64 if num_t is double else np.int64)
    cdef num_t[:, ::1] out = out_np
    for i in range(M):
        acc = 0
        for k in range(L):
            acc += x[i, (N - k) % N]
        out[i, 0] = acc
        for n in range(1, N):
            acc = acc - x[i, (n - L + N * L) % N] + x[i, n]
            out[i, n] = acc
    return out_np


def wavelet_sum(num_t[:, ::1] x, Py_ssize_t L):
    """Circular Haar wavelet sum: y(n) = y(n-1) - x(n-L) + 2x(n-L/2) - x(n)."""
    cdef Py_ssize_t M = x.shape[0], N = x.shape[1]
    cdef Py_ssize_t half = L // 2
    cdef Py_ssize_t i, n, k
    cdef num_t acc
    out_np = np.empty((M, N), dtype=np.float64 if num_t is double else np.int64)
    cdef num_t[:, ::1] out = out_np
    for i in range(M):
        acc = 0
        for k in range(half):
            acc -= x[i, (N * L - k) % N]
        for k in range(half, L):
            acc += x[i, (N * L - k) % N]
        out[i, 0] = acc
        for n in range(1, N):
            acc = (acc - x[i, (n - L + N * L) % N]
                   + 2 * x[i, (n - half + N * L) % N] - x[i, n])
            out[i, n] = acc
    return out_np


def conv2d_circular(double[:, ::1] x, double[:, ::1] kernel, bint causal=True):
    """Direct circular 2-D convolution, no FFT and no separability shortcut."""
    cdef Py_ssize_t H = x.shape[0], W = x.shape[1]
    cdef Py_ssize_t kh = kernel.shape[0], kw = kernel.shape[1]
    cdef Py_ssize_t n1, n2, k1, k2, r, s
    cdef double acc, kv
    cdef int sign = -1 if causal else 1
    out_np = np.zeros((H, W), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    for k1 in range(kh):
        for k2 in range(kw):
            kv = kernel[k1, k2]
            if kv == 0.0:
                continue
            for n1 in range(H):
                r = (n1 + sign * k1 + H * kh) % H
                for n2 in range(W):
                    s = (n2 + sign * k2 + W * kw) % W
                    out[n1, n2] += kv * x[r, s]
    return out_np


def gram_upper(double[:, ::1] psi, double[::1] y):
    """One pass over the pixels accumulating the upper triangle of psi psi^T
    and psi y; the lower triangle is mirrored afterwards."""
    cdef Py_ssize_t K = psi.shape[0], N = psi.shape[1]
    cdef Py_ssize_t n, i, j
    cdef double v
    q_np = np.zeros((K, K), dtype=np.float64)
    b_np = np.zeros(K, dtype=np.float64)
    cdef double[:, ::1] Q = q_np
    cdef double[::1] b = b_np
    cdef double[::1] row = np.empty(K, dtype=np.float64)
    for n in range(N):
        for i in range(K):
            row[i] = psi[i, n]
        v = y[n]
        for i in range(K):
            b[i] += row[i] * v
            for j in range(i, K):
                Q[i, j] += row[i] * row[j]
    for i in range(K):
        for j in range(i):
            Q[i, j] = Q[j, i]
    return q_np, b_np


def gradient_descent(double[:, ::1] Q, double[::1] c, double[::1] alpha0,
                     double mu, long max_iters, double tol, double blowup):
    """alpha <- alpha + mu (c - Q alpha) until the sup-norm residual <= tol.

    Returns (alpha, iterations, initial_residual, final_residual, diverged).
    """
    cdef Py_ssize_t K = Q.shape[0]
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef double r0, rmax, acc
    alpha_np = np.array(alpha0, dtype=np.float64)
    cdef double[::1] a = alpha_np
    cdef double[::1] r = np.empty(K, dtype=np.float64)

    rmax = 0.0
    for i in range(K):
        acc = c[i]
        for j in range(K):
            acc -= Q[i, j] * a[j]
        r[i] = acc
        if fabs(acc) > rmax:
            rmax = fabs(acc)
    r0 = rmax
    while rmax > tol and it < max_iters:
        for i in range(K):
            a[i] += mu * r[i]
        it += 1
        rmax = 0.0
        for i in range(K):
            acc = c[i]
            for j in range(K):
                acc -= Q[i, j] * a[j]
            r[i] = acc
            if fabs(acc) > rmax:
                rmax = fabs(acc)
        if rmax > blowup * r0 and rmax > tol:
            return alpha_np, it, r0, rmax, True
    return alpha_np, it, r0, rmax, False
