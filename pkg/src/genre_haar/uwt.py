"""Undecimated Haar analysis and synthesis with circular boundaries.

Six realizations compute the same transform:

``UWT-1D`` / ``UWT-2D``
    individual (two-tap, upsampled) filters applied as an a-trous cascade,
    separably or with the shared 2-D sums D+A, D-A, C+B, C-B.
``RUWT-1D`` / ``RUWT-2D``
    combined filters realised by running-sum recursions; the 2-D form builds
    an (L/2 x L/2) box image and combines four shifted copies of it.
``CONV-COMBINED-1D`` / ``CONV-COMBINED-2D``
    direct convolution with the combined filters.

All functions take images shaped ``(..., H, W)``; axis -2 is vertical.
Passing an :class:`AdditionCounter` records the additions each level
performs.
"""
import struct
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import filters
from ._backend import kernels

REALIZATIONS = (
    "UWT-1D",
    "UWT-2D",
    "RUWT-1D",
    "RUWT-2D",
    "CONV-COMBINED-1D",
    "CONV-COMBINED-2D",
)


class AdditionCounter:
    """Tallies additions per level.

    ``filter`` counts steady-state filter additions, ``boundary`` the extra
    additions spent on each line's initial value in recursive filters, and
    ``merge`` the additions that sum band contributions in reconstruction.
    ``outputs`` counts output samples produced by the level.
    """

    def __init__(self):
        self.levels = defaultdict(lambda: {"filter": 0, "boundary": 0, "merge": 0, "outputs": 0})

    def add(self, level, **counts):
        tally = self.levels[level]
        for key, value in counts.items():
            tally[key] += int(value)

    def per_output(self, level):
        t = self.levels[level]
        return t["filter"] / t["outputs"]

    def per_pixel(self, level, pixels):
        return self.levels[level]["filter"] / pixels


@dataclass
class SubbandSet:
    """Analysis bands stacked on axis 0 in :func:`filters.band_layout` order."""

    levels: int
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape[0] != 3 * self.levels + 1:
            raise ValueError(
                f"{self.data.shape[0]} bands given, {3 * self.levels + 1} expected "
                f"for {self.levels} levels"
            )

    @property
    def names(self):
        return filters.band_names(self.levels)

    @property
    def layout(self):
        return filters.band_layout(self.levels)

    def band(self, level, kind):
        return self.data[self.layout.index((level, kind))]

    def __len__(self):
        return self.data.shape[0]


def check_size(shape, levels):
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if len(shape) < 2:
        raise ValueError("image must be at least 2-D")
    L = 2**levels
    H, W = shape[-2:]
    if H < L or W < L:
        raise ValueError(f"{H}x{W} image is too small for {levels} levels (needs >= {L}x{L})")


# ---------------------------------------------------------------------------
# line primitives (circular, along one axis)


def _along(x, axis, fn, *args):
    x = np.moveaxis(np.asarray(x), axis, -1)
    shape = x.shape
    flat = np.ascontiguousarray(x.reshape(-1, shape[-1]))
    out = fn(flat, *args).reshape(shape)
    return np.moveaxis(out, -1, axis)


def _recursion(x, L, kind, axis, anticausal=False, counter=None, level=None):
    fn = kernels.box_sum if kind == "h" else kernels.wavelet_sum
    if anticausal:
        x = np.flip(x, axis)
    out = _along(x, axis, fn, L)
    if anticausal:
        out = np.flip(out, axis)
    if counter is not None:
        n = x.shape[axis]
        lines = x.size // n
        per_step = 2 if kind == "h" else 3
        counter.add(level, filter=lines * (n - 1) * per_step, boundary=lines * (L - 1))
    return out


def _conv1d(x, taps, axis, anticausal=False):
    """Direct circular convolution with a 1-D kernel: sum of shifted copies."""
    sign = -1 if anticausal else 1
    out = np.zeros(x.shape, dtype=np.float64)
    for k, t in enumerate(taps):
        if t != 0:
            out += t * np.roll(x, sign * k, axis=axis)
    return out


def _conv2d(x, kernel, anticausal=False):
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1, *x.shape[-2:])
    out = np.empty_like(flat)
    k = np.ascontiguousarray(kernel)
    for i in range(flat.shape[0]):
        out[i] = kernels.conv2d_circular(np.ascontiguousarray(flat[i]), k, not anticausal)
    return out.reshape(x.shape)


def _quad(x, s, anticausal=False):
    """D, A, B, C: the image and its copies delayed by s vertically and/or
    horizontally (advanced when anticausal)."""
    t = -s if anticausal else s
    D = x
    A = np.roll(x, (t, t), axis=(-2, -1))
    B = np.roll(x, t, axis=-1)
    C = np.roll(x, t, axis=-2)
    return D, A, B, C


def _combine(kind, D, A, B, C):
    """One band from the four corner samples, three additions."""
    if kind == "LL":
        return D + A + B + C
    if kind == "HH":
        return D + A - B - C
    if kind == "LH":
        return A + B - C - D
    return A + C - B - D  # HL


# ---------------------------------------------------------------------------
# analysis


def _analysis_uwt1d(y, levels, counter):
    a = y
    out = {}
    for j in range(1, levels + 1):
        s = 2 ** (j - 1)
        ar = np.roll(a, s, axis=-1)
        lo, hi = 0.5 * (a + ar), 0.5 * (ar - a)
        lo_c, hi_c = np.roll(lo, s, axis=-2), np.roll(hi, s, axis=-2)
        out[j, "LL"] = 0.5 * (lo + lo_c)
        out[j, "HL"] = 0.5 * (lo_c - lo)
        out[j, "LH"] = 0.5 * (hi + hi_c)
        out[j, "HH"] = 0.5 * (hi_c - hi)
        if counter is not None:
            counter.add(j, filter=6 * a.size, outputs=4 * a.size)
        a = out[j, "LL"]
    return out


def _analysis_uwt2d(y, levels, counter):
    a = y
    out = {}
    for j in range(1, levels + 1):
        D, A, B, C = _quad(a, 2 ** (j - 1))
        s1, d1, s2, d2 = D + A, D - A, C + B, C - B
        out[j, "LL"] = 0.25 * (s1 + s2)
        out[j, "HH"] = 0.25 * (s1 - s2)
        out[j, "LH"] = -0.25 * (d1 + d2)
        out[j, "HL"] = 0.25 * (d2 - d1)
        if counter is not None:
            counter.add(j, filter=8 * a.size, outputs=4 * a.size)
        a = out[j, "LL"]
    return out


def _analysis_ruwt1d(y, levels, counter):
    out = {}
    for j in range(1, levels + 1):
        L = 2**j
        kinds = ("LH", "HL", "HH", "LL") if j == levels else filters.DETAIL_KINDS
        rows = {}
        for a1 in sorted({filters.BAND_FILTERS[k][1] for k in kinds}):
            rows[a1] = _recursion(y, L, a1, -1, counter=counter, level=j)
        for kind in kinds:
            a0, a1 = filters.BAND_FILTERS[kind]
            out[j, kind] = _recursion(rows[a1], L, a0, -2, counter=counter, level=j) / L**2
        if counter is not None:
            counter.add(j, outputs=len(kinds) * y.size)
    return out


def _box_image(y, half, anticausal, counter, level):
    p = _recursion(y, half, "h", -1, anticausal, counter, level)
    return _recursion(p, half, "h", -2, anticausal, counter, level)


def _analysis_ruwt2d(y, levels, counter):
    out = {}
    for j in range(1, levels + 1):
        L = 2**j
        kinds = ("LH", "HL", "HH", "LL") if j == levels else filters.DETAIL_KINDS
        quad = _quad(_box_image(y, L // 2, False, counter, j), L // 2)
        for kind in kinds:
            out[j, kind] = _combine(kind, *quad) / L**2
        if counter is not None:
            counter.add(j, filter=3 * len(kinds) * y.size, outputs=len(kinds) * y.size)
    return out


def _analysis_conv1d(y, levels, counter):
    out = {}
    for j in range(1, levels + 1):
        L = 2**j
        kinds = ("LH", "HL", "HH", "LL") if j == levels else filters.DETAIL_KINDS
        rows = {a1: _conv1d(y, filters.combined_1d(j, a1), -1)
                for a1 in sorted({filters.BAND_FILTERS[k][1] for k in kinds})}
        for kind in kinds:
            a0, a1 = filters.BAND_FILTERS[kind]
            out[j, kind] = _conv1d(rows[a1], filters.combined_1d(j, a0), -2)
        if counter is not None:
            passes = len(rows) + len(kinds)
            counter.add(j, filter=passes * (L - 1) * y.size, outputs=len(kinds) * y.size)
    return out


def _analysis_conv2d(y, levels, counter):
    out = {}
    for j in range(1, levels + 1):
        L = 2**j
        kinds = ("LH", "HL", "HH", "LL") if j == levels else filters.DETAIL_KINDS
        for kind in kinds:
            out[j, kind] = _conv2d(y, filters.combined_2d(j, kind))
        if counter is not None:
            counter.add(j, filter=len(kinds) * (L * L - 1) * y.size, outputs=len(kinds) * y.size)
    return out


_ANALYSIS = {
    "UWT-1D": _analysis_uwt1d,
    "UWT-2D": _analysis_uwt2d,
    "RUWT-1D": _analysis_ruwt1d,
    "RUWT-2D": _analysis_ruwt2d,
    "CONV-COMBINED-1D": _analysis_conv1d,
    "CONV-COMBINED-2D": _analysis_conv2d,
}


def _check_realization(realization):
    if realization not in REALIZATIONS:
        raise ValueError(f"unknown realization {realization!r}; choose from {REALIZATIONS}")


def decompose(img, levels=5, realization="UWT-2D", counter=None):
    """Analysis bank: 3 detail bands per level plus the coarsest LL."""
    _check_realization(realization)
    y = np.asarray(img, dtype=np.float64)
    check_size(y.shape, levels)
    out = _ANALYSIS[realization](y, levels, counter)
    data = np.stack([out[key] for key in filters.band_layout(levels)])
    return SubbandSet(levels, data)


def decompose_recursive(img, levels=5, domain="2D", counter=None):
    """Analysis through the running-sum recursions (1-D or 2-D form)."""
    if domain not in ("1D", "2D"):
        raise ValueError("domain must be '1D' or '2D'")
    return decompose(img, levels, f"RUWT-{domain}", counter)


# ---------------------------------------------------------------------------
# synthesis


def _synth_individual_2d(x, j, kind, counter):
    D, A, B, C = _quad(x, 2 ** (j - 1), anticausal=True)
    if counter is not None:
        counter.add(j, filter=3 * x.size, outputs=x.size)
    return 0.25 * _combine(kind, D, A, B, C)


def _synth_individual_1d(x, j, kind, counter):
    s = 2 ** (j - 1)
    a0, a1 = filters.BAND_FILTERS[kind]
    for axis, f in ((-1, a1), (-2, a0)):
        xs = np.roll(x, -s, axis=axis)
        x = 0.5 * (xs + x) if f == "h" else 0.5 * (xs - x)
    if counter is not None:
        counter.add(j, filter=2 * x.size, outputs=x.size)
    return x


def _psi_individual(b, j, kind, stage, counter):
    x = stage(b, j, kind, counter)
    for i in range(j - 1, 0, -1):
        x = stage(x, i, "LL", counter)
    return x


def _psi_ruwt1d(b, j, kind, counter):
    L = 2**j
    a0, a1 = filters.BAND_FILTERS[kind]
    x = _recursion(b, L, a1, -1, True, counter, j)
    x = _recursion(x, L, a0, -2, True, counter, j)
    if counter is not None:
        counter.add(j, outputs=b.size)
    return x / L**2


def _psi_ruwt2d(b, j, kind, counter):
    L = 2**j
    quad = _quad(_box_image(b, L // 2, True, counter, j), L // 2, anticausal=True)
    if counter is not None:
        counter.add(j, filter=3 * b.size, outputs=b.size)
    return _combine(kind, *quad) / L**2


def _psi_conv1d(b, j, kind, counter):
    L = 2**j
    a0, a1 = filters.BAND_FILTERS[kind]
    x = _conv1d(b, filters.combined_1d(j, a1), -1, anticausal=True)
    x = _conv1d(x, filters.combined_1d(j, a0), -2, anticausal=True)
    if counter is not None:
        counter.add(j, filter=2 * (L - 1) * b.size, outputs=b.size)
    return x


def _psi_conv2d(b, j, kind, counter):
    L = 2**j
    if counter is not None:
        counter.add(j, filter=(L * L - 1) * b.size, outputs=b.size)
    return _conv2d(b, filters.combined_2d(j, kind), anticausal=True)


_SYNTHESIS = {
    "UWT-1D": lambda b, j, k, c: _psi_individual(b, j, k, _synth_individual_1d, c),
    "UWT-2D": lambda b, j, k, c: _psi_individual(b, j, k, _synth_individual_2d, c),
    "RUWT-1D": _psi_ruwt1d,
    "RUWT-2D": _psi_ruwt2d,
    "CONV-COMBINED-1D": _psi_conv1d,
    "CONV-COMBINED-2D": _psi_conv2d,
}


def recompose(bands, realization="RUWT-2D", counter=None, levels=None):
    """Synthesis images psi_i = R_i D_i y, one per band, stacked on axis 0.

    No shrinkage is applied; the images sum to the analysed input.
    """
    _check_realization(realization)
    if not isinstance(bands, SubbandSet):
        data = np.asarray(bands, dtype=np.float64)
        if levels is None:
            levels = (data.shape[0] - 1) // 3
        bands = SubbandSet(levels, data)
    elif levels is not None and levels != bands.levels:
        raise ValueError(f"band set has {bands.levels} levels, {levels} requested")
    check_size(bands.data.shape[1:], bands.levels)
    synth = _SYNTHESIS[realization]
    psis = [synth(b, j, kind, counter) for b, (j, kind) in zip(bands.data, bands.layout)]
    return np.stack(psis)


def reconstruct(bands, realization="UWT-2D", counter=None):
    """Inverse transform: a single image.

    The individual-filter realizations run the usual level-by-level
    reconstruction, merging the four band contributions of a level into one
    low-pass image; the combined-filter realizations sum :func:`recompose`.
    """
    _check_realization(realization)
    if realization not in ("UWT-1D", "UWT-2D"):
        return recompose(bands, realization, counter).sum(axis=0)
    J = bands.levels
    a = bands.band(J, "LL")
    for j in range(J, 0, -1):
        parts = {k: bands.band(j, k) for k in filters.DETAIL_KINDS}
        parts["LL"] = a
        s = 2 ** (j - 1)
        if realization == "UWT-2D":
            a = sum(_synth_individual_2d(parts[k], j, k, None) for k in ("LL", "LH", "HL", "HH"))
            if counter is not None:
                counter.add(j, filter=12 * a.size, merge=3 * a.size, outputs=a.size)
        else:
            # columns first on all four bands, then rows on the two sums
            col = {}
            for k, x in parts.items():
                xs = np.roll(x, -s, axis=-2)
                col[k] = 0.5 * (xs + x) if filters.BAND_FILTERS[k][0] == "h" else 0.5 * (xs - x)
            low, high = col["LL"] + col["HL"], col["LH"] + col["HH"]
            low = 0.5 * (np.roll(low, -s, axis=-1) + low)
            high = 0.5 * (np.roll(high, -s, axis=-1) - high)
            a = low + high
            if counter is not None:
                counter.add(j, filter=6 * a.size, merge=3 * a.size, outputs=a.size)
    return a


def shrink_and_combine(psis, alpha, output="real"):
    """x_hat = sum_i alpha_i psi_i; ``output="uint8"`` rounds and clips."""
    psis = np.asarray(psis, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.shape[0] != psis.shape[0]:
        raise ValueError(f"{alpha.shape} shrinkage vector for {psis.shape[0]} synthesis images")
    x = np.tensordot(alpha, psis, axes=1)
    if output == "uint8":
        return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)
    return x


# ---------------------------------------------------------------------------
# subband dump: 16-byte header then float32 planes, all little-endian

SUBBAND_MAGIC = b"HSB1"


def write_subbands(path, bands):
    data = np.asarray(bands.data if isinstance(bands, SubbandSet) else bands)
    if data.ndim != 3:
        raise ValueError("subband dump needs bands shaped (count, height, width)")
    count, height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(SUBBAND_MAGIC + struct.pack("<III", width, height, count))
        fh.write(data.astype("<f4").tobytes())


def read_subbands(path):
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != SUBBAND_MAGIC:
            raise ValueError(f"{path}: not a subband dump")
        width, height, count = struct.unpack("<III", header[4:])
        payload = fh.read()
    expected = 4 * width * height * count
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype="<f4").reshape(count, height, width).astype(np.float64)
    if (count - 1) % 3:
        return data
    return SubbandSet((count - 1) // 3, data)
