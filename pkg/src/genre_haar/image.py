"""Images as 2-D float arrays, their row-major vector view, and additive noise.

An image is a ``(height, width)`` numpy array.  Functions that only touch
pixels elementwise also accept stacks shaped ``(..., height, width)``.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DISTRIBUTIONS = ("gaussian", "uniform", "laplacian", "custom")


def as_image(img, dtype=np.float64):
    """Validate and return ``img`` as a 2-D array of ``dtype``."""
    arr = np.asarray(img, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image must have positive width and height")
    return arr


def row_vectorize(img):
    """Row-major vector of length width*height."""
    return as_image(img).reshape(-1).copy()


def devectorize(vec, width, height):
    vec = np.asarray(vec, dtype=np.float64)
    if vec.ndim != 1 or vec.size != width * height:
        raise ValueError(f"vector of size {vec.size} cannot form a {height}x{width} image")
    return vec.reshape(height, width).copy()


def pixel_of_index(n, width):
    """(row, col) of row-vectorised index ``n``."""
    return divmod(n, width)


def index_of_pixel(row, col, width):
    return row * width + col


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean additive noise parameterised by its standard deviation.

    ``custom`` requires ``sampler(rng, shape)`` returning zero-mean,
    unit-variance samples; they are scaled by ``sigma``.
    """

    distribution: str = "gaussian"
    sigma: float = 25.0
    seed: int = 0
    sampler: Optional[Callable] = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unsupported noise distribution {self.distribution!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.distribution == "custom" and self.sampler is None:
            raise ValueError("custom noise needs a sampler")


def _draw(rng, model, n):
    s = model.sigma
    if model.distribution == "gaussian":
        return rng.normal(0.0, s, n)
    if model.distribution == "uniform":
        half = s * np.sqrt(3.0)
        return rng.uniform(-half, half, n)
    if model.distribution == "laplacian":
        return rng.laplace(0.0, s / np.sqrt(2.0), n)
    return s * np.asarray(model.sampler(rng, n), dtype=np.float64)


def noise(shape, model):
    """Noise samples of ``shape`` with one PCG64 substream per pixel row.

    Row ``r`` (counting rows of all leading dimensions in C order) always
    draws from child ``r`` of ``SeedSequence(model.seed)``, so any row can be
    regenerated independently and in parallel.
    """
    shape = tuple(shape)
    width = shape[-1]
    rows = int(np.prod(shape[:-1], dtype=np.int64))
    out = np.empty((rows, width))
    children = np.random.SeedSequence(model.seed).spawn(rows)
    for r, child in enumerate(children):
        out[r] = _draw(np.random.Generator(np.random.PCG64(child)), model, width)
    return out.reshape(shape)


def add_noise(img, model):
    """Observation ``y = x + w``; not clipped or quantised."""
    x = np.asarray(img, dtype=np.float64)
    if model.sigma == 0:
        return x.copy()
    return x + noise(x.shape, model)


def quantize_8bit(img):
    """Round half away from zero and clip to [0, 255], as a sensor would."""
    x = np.asarray(img, dtype=np.float64)
    return np.clip(np.sign(x) * np.floor(np.abs(x) + 0.5), 0, 255)
