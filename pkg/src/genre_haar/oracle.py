"""Brute-force dense references for tests: explicit circulant matrices.

Nothing here imports the transform code.  Kernels are rebuilt from the
level-1 Haar pair by explicit upsampling and ``np.convolve``, matrices are
filled entry by entry, and the denoiser is solved with a dense solve.
Sizes are capped at 4096 pixels.
"""
import numpy as np

MAX_PIXELS = 4096

_H = np.array([0.5, 0.5])
_G = np.array([-0.5, 0.5])


def _upsample(taps, factor):
    out = np.zeros((len(taps) - 1) * factor + 1)
    out[::factor] = taps
    return out


def cascade_kernel_1d(level, last):
    """h_1 * h_2 * ... * h_{level-1} * (last filter at this level)."""
    k = np.array([1.0])
    for j in range(1, level):
        k = np.convolve(k, _upsample(_H, 2 ** (j - 1)))
    return np.convolve(k, _upsample(_G if last == "g" else _H, 2 ** (level - 1)))


def band_kernels(levels):
    """2-D analysis kernels (convolution order) in band-layout order."""
    pairs = {"LH": ("h", "g"), "HL": ("g", "h"), "HH": ("g", "g"), "LL": ("h", "h")}
    layout = [(j, k) for j in range(1, levels + 1) for k in ("LH", "HL", "HH")] + [(levels, "LL")]
    return [np.outer(cascade_kernel_1d(j, pairs[k][0]), cascade_kernel_1d(j, pairs[k][1]))
            for j, k in layout]


def circulant_2d(kernel, height, width):
    """Matrix of y -> circular 2-D convolution with ``kernel`` on row-major vectors."""
    N = height * width
    M = np.zeros((N, N))
    for n1 in range(height):
        for n2 in range(width):
            row = n1 * width + n2
            for (k1, k2), v in np.ndenumerate(kernel):
                m = ((n1 - k1) % height) * width + (n2 - k2) % width
                M[row, m] += v
    return M


def build_dense(levels, width, height):
    """Analysis matrices D_i, synthesis R_i = D_i^T, and H_i = R_i D_i."""
    if width * height > MAX_PIXELS:
        raise ValueError(f"{width}x{height} exceeds the dense oracle cap of {MAX_PIXELS} pixels")
    D = [circulant_2d(k, height, width) for k in band_kernels(levels)]
    R = [d.T.copy() for d in D]
    H = [r @ d for r, d in zip(R, D)]
    return D, R, H


def combine(H, alpha):
    """B(alpha) = sum_i alpha_i H_i."""
    return sum(a * h for a, h in zip(alpha, H))


def dense_risk(B, y, sigma2):
    N = y.size
    r = B @ y - y
    return (r @ r + 2 * sigma2 * np.trace(B) - N * sigma2) / N


def dense_denoise(y, sigma, levels):
    """(alpha*, x_hat, risk) for a row-major image ``y`` by dense linear algebra."""
    y = np.asarray(y, dtype=np.float64)
    height, width = y.shape
    _, _, H = build_dense(levels, width, height)
    v = y.reshape(-1)
    Psi = np.stack([h @ v for h in H], axis=1)
    q = sigma**2 * np.array([np.trace(h) for h in H])
    alpha = np.linalg.solve(Psi.T @ Psi, Psi.T @ v - q)
    x_hat = Psi @ alpha
    risk = dense_risk(combine(H, alpha), v, sigma**2)
    return alpha, x_hat.reshape(height, width), risk
