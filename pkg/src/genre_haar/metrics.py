"""PSNR and SSIM."""
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

PEAK_8BIT = 255.0
IDENTICAL = math.inf  # psnr of identical images


def _pair(ref, test):
    a = np.asarray(ref, dtype=np.float64)
    b = np.asarray(test, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(ref, test):
    a, b = _pair(ref, test)
    return float(np.mean((a - b) ** 2))


def psnr(ref, test, peak=None):
    """10 log10(peak^2 / MSE) in dB.

    ``peak`` defaults to the maximum of ``ref``.  Pass a number to use a
    fixed peak (e.g. 255, or the noisy observation's maximum).  Identical
    images give :data:`IDENTICAL` (+inf).
    """
    a, b = _pair(ref, test)
    err = float(np.mean((a - b) ** 2))
    if err == 0.0:
        return IDENTICAL
    p = float(a.max()) if peak is None else float(peak)
    return 10.0 * math.log10(p * p / err)


def peak_for(mode, reference, observation=None):
    """The PSNR peak for ``mode``: ``reference`` max, ``observation`` max, or 255."""
    if mode == "reference":
        return float(np.max(reference))
    if mode == "observation":
        if observation is None:
            raise ValueError("observation peak needs the noisy observation")
        return float(np.max(observation))
    if mode == "8bit":
        return PEAK_8BIT
    raise ValueError(f"unknown peak mode {mode!r}")


@dataclass(frozen=True)
class SsimParams:
    k1: float = 0.01
    k2: float = 0.03
    L: float = 255.0
    mode: str = "windowed"
    window: int = 11
    weighting: str = "gaussian"
    gaussian_sigma: float = 1.5

    def __post_init__(self):
        if self.mode not in ("windowed", "global"):
            raise ValueError(f"unknown SSIM mode {self.mode!r}")
        if self.weighting not in ("gaussian", "uniform"):
            raise ValueError(f"unknown window weighting {self.weighting!r}")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("k1, k2 and L must give positive stabilisers")

    @property
    def c1(self):
        return (self.k1 * self.L) ** 2

    @property
    def c2(self):
        return (self.k2 * self.L) ** 2


def _formula(mx, my, vx, vy, cxy, p):
    return ((2 * mx * my + p.c1) * (2 * cxy + p.c2)) / ((mx * mx + my * my + p.c1) * (vx + vy + p.c2))


def _weights(p):
    if p.weighting == "uniform":
        return np.full(p.window, 1.0 / p.window)
    t = np.arange(p.window) - (p.window - 1) / 2
    w = np.exp(-(t * t) / (2 * p.gaussian_sigma**2))
    return w / w.sum()


def _filter_valid(x, w):
    """Separable weighted mean over every full window (no padding)."""
    k = w.size
    x = sliding_window_view(x, k, axis=1) @ w
    return sliding_window_view(x, k, axis=0) @ w


def ssim_map(ref, test, params=None):
    p = params or SsimParams()
    a, b = _pair(ref, test)
    if min(a.shape) < p.window:
        raise ValueError(f"image {a.shape} smaller than the {p.window}x{p.window} window")
    w = _weights(p)
    mx, my = _filter_valid(a, w), _filter_valid(b, w)
    vx = _filter_valid(a * a, w) - mx * mx
    vy = _filter_valid(b * b, w) - my * my
    cxy = _filter_valid(a * b, w) - mx * my
    return _formula(mx, my, vx, vy, cxy, p)


def ssim(ref, test, params=None):
    """Structural similarity.

    ``global`` evaluates the formula once with whole-image statistics;
    ``windowed`` (default) averages it over every 11x11 Gaussian-weighted
    window lying fully inside the image.  Variances and covariance use the
    population (1/n) normalisation.
    """
    p = params or SsimParams()
    a, b = _pair(ref, test)
    if np.array_equal(a, b):
        return 1.0
    if p.mode == "global":
        mx, my = a.mean(), b.mean()
        vx, vy = a.var(), b.var()
        cxy = np.mean((a - mx) * (b - my))
        return float(_formula(mx, my, vx, vy, cxy, p))
    return float(np.mean(ssim_map(a, b, p)))
