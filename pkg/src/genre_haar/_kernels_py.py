"""Numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and same results; used when the extension is missing or when
``GENRE_HAAR_PURE_PYTHON`` is set.  Recursions stay recursions: the loop runs
along the filtered axis and is vectorised across lines.
"""
import numpy as np

_GRAM_BLOCK = 8192


def box_sum(x, L):
    x = np.asarray(x)
    M, N = x.shape
    idx = np.arange(L)
    out = np.empty_like(x)
    acc = x[:, (-idx) % N].sum(axis=1)
    out[:, 0] = acc
    for n in range(1, N):
        acc = acc - x[:, (n - L) % N] + x[:, n]
        out[:, n] = acc
    return out


def wavelet_sum(x, L):
    x = np.asarray(x)
    M, N = x.shape
    half = L // 2
    out = np.empty_like(x)
    acc = (x[:, (-np.arange(half, L)) % N].sum(axis=1)
           - x[:, (-np.arange(half)) % N].sum(axis=1))
    out[:, 0] = acc
    for n in range(1, N):
        acc = acc - x[:, (n - L) % N] + 2 * x[:, (n - half) % N] - x[:, n]
        out[:, n] = acc
    return out


def conv2d_circular(x, kernel, causal=True):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    sign = 1 if causal else -1
    for (k1, k2), kv in np.ndenumerate(kernel):
        if kv != 0.0:
            out += kv * np.roll(x, (sign * k1, sign * k2), axis=(0, 1))
    return out


def gram_upper(psi, y):
    K, N = psi.shape
    iu, ju = np.triu_indices(K)
    upper = np.zeros(iu.size)
    b = np.zeros(K)
    # fixed block order keeps the reduction deterministic
    for start in range(0, N, _GRAM_BLOCK):
        blk = psi[:, start:start + _GRAM_BLOCK]
        upper += np.einsum("kn,kn->k", blk[iu], blk[ju])
        b += blk @ y[start:start + _GRAM_BLOCK]
    Q = np.zeros((K, K))
    Q[iu, ju] = upper
    Q[ju, iu] = upper
    return Q, b


def gradient_descent(Q, c, alpha0, mu, max_iters, tol, blowup):
    a = np.array(alpha0, dtype=np.float64)
    r = c - Q @ a
    r0 = rmax = np.abs(r).max()
    it = 0
    while rmax > tol and it < max_iters:
        a += mu * r
        it += 1
        r = c - Q @ a
        rmax = np.abs(r).max()
        if rmax > blowup * r0 and rmax > tol:
            return a, it, r0, rmax, True
    return a, it, r0, rmax, False
