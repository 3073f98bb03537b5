"""Haar filter taps, individual and combined, in 1-D and 2-D.

Taps are stored in convolution order: ``taps[k]`` multiplies ``x(n - k)``.
Level ``j`` has filter length ``L = 2**j``.  Analysis filters are causal;
synthesis filters are the analysis taps reversed (anticausal), which makes
``sum_i R_i D_i`` the identity with no net shift.

Band names give the filter along axis 0 (vertical) then axis 1 (horizontal):
``LH`` is low-pass down the columns and high-pass along the rows.
"""
from dataclasses import dataclass

import numpy as np

H1 = np.array([0.5, 0.5])
G1 = np.array([-0.5, 0.5])
# Level-1 synthesis taps as usually printed (causal form).  The transforms use
# reversed analysis taps instead, i.e. these up to a one-sample advance.
H1_SYNTHESIS = np.array([0.5, 0.5])
G1_SYNTHESIS = np.array([0.5, -0.5])

DETAIL_KINDS = ("LH", "HL", "HH")
BAND_FILTERS = {"LL": ("h", "h"), "LH": ("h", "g"), "HL": ("g", "h"), "HH": ("g", "g")}


def band_layout(levels):
    """(level, kind) for every band: level-major, LH < HL < HH, LL last."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    layout = [(j, k) for j in range(1, levels + 1) for k in DETAIL_KINDS]
    layout.append((levels, "LL"))
    return layout


def band_names(levels):
    return [f"{kind}{level}" for level, kind in band_layout(levels)]


def individual_1d(level, kind):
    """Level-1 filter upsampled by 2**(level-1): taps at 0 and L/2."""
    base = H1 if kind == "h" else G1
    L = 2**level
    taps = np.zeros(L)
    taps[0], taps[L // 2] = base
    return taps


def combined_1d(level, kind):
    """Cascade h_1 * ... * h_{j-1} * (h_j or g_j): a length-L box of +-1/L."""
    L = 2**level
    taps = np.full(L, 1.0 / L)
    if kind == "g":
        taps[: L // 2] *= -1
    return taps


def _outer(level, band, one_d):
    a0, a1 = BAND_FILTERS[band]
    return np.outer(one_d(level, a0), one_d(level, a1))


def individual_2d(level, band):
    return _outer(level, band, individual_1d)


def combined_2d(level, band):
    k = _outer(level, band, combined_1d)
    L = 2**level
    a0, a1 = BAND_FILTERS[band]
    s0 = np.sign(combined_1d(level, a0))
    s1 = np.sign(combined_1d(level, a1))
    assert np.all(np.abs(k) == 1.0 / L**2), "combined kernel magnitude"
    assert np.array_equal(np.sign(k), np.outer(s0, s1)), "combined kernel sign blocks"
    return k


@dataclass(frozen=True)
class HaarKernel:
    level: int
    kind: str  # "h"/"g" in 1-D, a band name in 2-D
    combined: bool = True

    @property
    def length(self):
        return 2**self.level

    @property
    def normalization(self):
        L = self.length
        return 1.0 / L if self.kind in ("h", "g") else 1.0 / L**2

    @property
    def taps(self):
        if self.kind in ("h", "g"):
            f = combined_1d if self.combined else individual_1d
        else:
            f = combined_2d if self.combined else individual_2d
        return f(self.level, self.kind)

    @property
    def synthesis_taps(self):
        t = self.taps
        return t[::-1] if t.ndim == 1 else t[::-1, ::-1]
