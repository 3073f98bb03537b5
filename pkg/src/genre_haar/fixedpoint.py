"""Bit-accurate simulation of the fixed-point filter banks.

Values are held as int64 arrays of ``value * 2**frac_bits``.  Decomposition
is the 2-D individual-filter cascade: each level combines four delayed
copies of the previous low-pass band with adds only, so the exact result
gains two fraction bits per level before it is cut back to the scheduled
format.  Recomposition is the recursive combined-filter bank: an
``L/2 x L/2`` running-sum box, four corner samples, then a shift by
``2 * level``.  The Gram matrix, the solver and the final weighted sum run in
double precision, and the output is rounded to the nearest 8-bit integer.
"""
from dataclasses import dataclass, field

import numpy as np

from . import filters, genre, metrics, uwt

MAX_WIDTH = 32
MODES = ("truncate", "round-nearest")


@dataclass(frozen=True)
class QFormat:
    """Qm.n: ``int_bits`` integer bits, ``frac_bits`` fraction bits, plus a
    sign bit when ``signed``."""

    signed: bool
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError("bit counts must be >= 0")
        if self.width > MAX_WIDTH:
            raise ValueError(f"{self} needs {self.width} bits, more than {MAX_WIDTH}")

    @property
    def width(self):
        return self.int_bits + self.frac_bits + int(self.signed)

    @property
    def lsb(self):
        return 2.0**-self.frac_bits

    @property
    def min_int(self):
        return -(1 << (self.int_bits + self.frac_bits)) if self.signed else 0

    @property
    def max_int(self):
        return (1 << (self.int_bits + self.frac_bits)) - 1

    @property
    def min_value(self):
        return self.min_int * self.lsb

    @property
    def max_value(self):
        return self.max_int * self.lsb

    def __str__(self):
        tail = "" if self.signed else "(unsigned)"
        return f"Q{self.int_bits}.{self.frac_bits}{tail}"


@dataclass
class OverflowCounter:
    """Sticky saturation tally; one per call, never shared."""

    count: int = 0

    @property
    def flag(self):
        return self.count > 0


def _saturate(v, fmt, counter):
    over = (v < fmt.min_int) | (v > fmt.max_int)
    n = int(np.count_nonzero(over))
    if n:
        v = np.clip(v, fmt.min_int, fmt.max_int)
        if counter is not None:
            counter.count += n
    return v


def requantize(v, from_frac, fmt, mode="truncate", counter=None):
    """Move integers at ``from_frac`` fraction bits onto ``fmt``'s grid.

    Dropping bits is an arithmetic right shift (floor) for ``truncate``, and
    rounds half away from zero for ``round-nearest``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown quantization mode {mode!r}")
    v = np.asarray(v, dtype=np.int64)
    shift = from_frac - fmt.frac_bits
    if shift > 0:
        if mode == "truncate":
            v = v >> shift
        else:
            half = np.int64(1) << (shift - 1)
            v = np.sign(v) * ((np.abs(v) + half) >> shift)
    elif shift < 0:
        v = v << -shift
    return _saturate(v, fmt, counter)


def to_int(x, fmt, mode="truncate", counter=None):
    """Real values to integers on ``fmt``'s grid."""
    if mode not in MODES:
        raise ValueError(f"unknown quantization mode {mode!r}")
    k = np.asarray(x, dtype=np.float64) * 2.0**fmt.frac_bits
    if not np.all(np.isfinite(k)):
        raise ValueError("cannot quantize non-finite values")
    k = np.floor(k) if mode == "truncate" else np.sign(k) * np.floor(np.abs(k) + 0.5)
    lo, hi = float(fmt.min_int), float(fmt.max_int)
    over = (k < lo) | (k > hi)
    n = int(np.count_nonzero(over))
    if n:
        k = np.clip(k, lo, hi)
        if counter is not None:
            counter.count += n
    return k.astype(np.int64)


def from_int(v, fmt_or_frac):
    frac = fmt_or_frac.frac_bits if isinstance(fmt_or_frac, QFormat) else int(fmt_or_frac)
    return np.asarray(v, dtype=np.float64) * 2.0**-frac


def quantize(x, fmt, mode="truncate", counter=None):
    """Nearest representable value below (truncate) or nearest (round-nearest),
    saturated to the format range.  Returns floats on the ``2**-n`` grid."""
    out = from_int(to_int(x, fmt, mode, counter), fmt)
    return out if np.ndim(x) else float(out)


@dataclass(frozen=True)
class FormatSchedule:
    """Per-level fraction bits for decomposition and recomposition outputs.

    Detail bands are signed with 7 integer bits; low-pass bands are unsigned
    with 8 integer bits and the same fraction bits as the details.
    """

    name: str
    decomposition: tuple
    recomposition: tuple

    @classmethod
    def full(cls, levels=5):
        """Exact widths: two more fraction bits per decomposition level and
        ``4 j`` after recomposition."""
        return cls("full", tuple(2 * j for j in range(1, levels + 1)),
                   tuple(4 * j for j in range(1, levels + 1)))

    @classmethod
    def truncated(cls, levels=5):
        """Fraction bits capped at 6 so every sample fits 16 bits."""
        return cls("truncated", tuple(min(2 * j, 6) for j in range(1, levels + 1)),
                   tuple(min(4 * j, 6) for j in range(1, levels + 1)))

    @classmethod
    def named(cls, name, levels=5):
        if name == "full":
            return cls.full(levels)
        if name == "truncated":
            return cls.truncated(levels)
        raise ValueError(f"unknown format schedule {name!r}")

    @property
    def levels(self):
        return len(self.decomposition)

    def decomposition_format(self, level, kind):
        return _band_format(kind, self.decomposition[level - 1])

    def recomposition_format(self, level, kind):
        return _band_format(kind, self.recomposition[level - 1])

    def rows(self):
        """(level, detail decomposition, detail recomposition) per level."""
        return [(j, str(self.decomposition_format(j, "HH")), str(self.recomposition_format(j, "HH")))
                for j in range(1, self.levels + 1)]


def _band_format(kind, frac):
    return QFormat(False, 8, frac) if kind == "LL" else QFormat(True, 7, frac)


INPUT_FORMAT = QFormat(False, 8, 0)


def _check_8bit(img):
    y = np.asarray(img)
    if y.ndim != 2:
        raise ValueError("fixed-point pipeline expects a single 2-D image")
    if not np.all(np.isfinite(y)) or np.any(y != np.round(y)) or y.min() < 0 or y.max() > 255:
        raise ValueError("fixed-point pipeline needs 8-bit unsigned input (integers in 0..255)")
    return y.astype(np.int64)


def decompose_fixed(img, schedule=None, mode="truncate", counter=None):
    """Integer subbands and their fraction bits.

    Returns ``(ints, fracs)`` with ``ints`` shaped ``(3J+1, H, W)`` in band
    layout order; band ``i`` holds ``value * 2**fracs[i]``.
    """
    schedule = schedule or FormatSchedule.truncated()
    J = schedule.levels
    ll = _check_8bit(img)
    uwt.check_size(ll.shape, J)
    frac = 0
    out = {}
    for j in range(1, J + 1):
        quad = uwt._quad(ll, 2 ** (j - 1))
        kinds = filters.DETAIL_KINDS + ("LL",)
        for kind in kinds:
            exact = uwt._combine(kind, *quad)  # value * 2**(frac + 2)
            out[j, kind] = requantize(exact, frac + 2, schedule.decomposition_format(j, kind),
                                      mode, counter)
        ll = out[j, "LL"]
        frac = schedule.decomposition[j - 1]
    layout = filters.band_layout(J)
    ints = np.stack([out[key] for key in layout])
    fracs = [schedule.decomposition[j - 1] for j, _ in layout]
    return ints, fracs


def recompose_fixed(ints, fracs, schedule=None, mode="truncate", counter=None):
    """Integer synthesis images ``psi_i * 2**rec_frac`` and their fraction bits."""
    schedule = schedule or FormatSchedule.truncated()
    J = schedule.levels
    layout = filters.band_layout(J)
    if len(ints) != len(layout):
        raise ValueError(f"{len(ints)} bands for {J} levels")
    psis, out_fracs = [], []
    for b, f, (j, kind) in zip(ints, fracs, layout):
        half = 2 ** (j - 1)
        box = uwt._box_image(np.ascontiguousarray(b, dtype=np.int64), half, True, None, j)
        exact = uwt._combine(kind, *uwt._quad(box, half, anticausal=True))  # * 2**(f + 2j)
        fmt = schedule.recomposition_format(j, kind)
        psis.append(requantize(exact, f + 2 * j, fmt, mode, counter))
        out_fracs.append(fmt.frac_bits)
    return np.stack(psis), out_fracs


def fixed_synthesis(img, schedule=None, mode="truncate", counter=None):
    """Real-valued synthesis images of the fixed-point datapath, plus the
    decomposition bands (real-valued) for error reporting."""
    schedule = schedule or FormatSchedule.truncated()
    d_ints, d_fracs = decompose_fixed(img, schedule, mode, counter)
    r_ints, r_fracs = recompose_fixed(d_ints, d_fracs, schedule, mode, counter)
    bands = np.stack([from_int(v, f) for v, f in zip(d_ints, d_fracs)])
    psis = np.stack([from_int(v, f) for v, f in zip(r_ints, r_fracs)])
    return bands, psis


@dataclass
class FixedReport:
    schedule: str
    formats: list
    overflow_count: int
    max_subband_error: float
    max_synthesis_error: float
    psnr_fixed: float = float("nan")
    psnr_float: float = float("nan")
    note: str = "Gram accumulation and solver in double precision; filter banks fixed-point"
    extra: dict = field(default_factory=dict)

    @property
    def psnr_delta(self):
        return self.psnr_fixed - self.psnr_float

    def as_dict(self):
        d = {k: v for k, v in self.__dict__.items() if k != "extra"}
        d["psnr_delta"] = self.psnr_delta
        d.update(self.extra)
        return d


def pipeline_fixed(y, sigma, cfg=None, schedule=None, reference=None, alpha=None, mode="truncate",
                   peak=None):
    """Denoise with fixed-point filter banks.

    Returns ``(x_hat_uint8, diagnostics, report)``.  The float pipeline runs
    alongside for the error figures; when ``reference`` (the clean image) is
    given the report carries both PSNRs (``peak`` as in :func:`metrics.psnr`).
    ``alpha`` bypasses the solver.
    """
    schedule = schedule or FormatSchedule.truncated()
    cfg = cfg or genre.SolverConfig()
    y8 = _check_8bit(y).astype(np.float64)
    J = schedule.levels
    counter = OverflowCounter()
    bands_fx, psis_fx = fixed_synthesis(y8, schedule, mode, counter)
    bands_fl = uwt.decompose(y8, J, "UWT-2D").data
    psis_fl = uwt.recompose(bands_fl, "RUWT-2D", levels=J)
    if alpha is None:
        _, diag = genre.denoise_from_psis(psis_fx, y8, sigma, cfg, J, "UWT-2D", "RUWT-2D")
        x_float, _ = genre.denoise_from_psis(psis_fl, y8, sigma, cfg, J, "UWT-2D", "RUWT-2D")
        a = diag.alpha
    else:
        a = np.asarray(alpha, dtype=np.float64)
        diag = None
        x_float = uwt.shrink_and_combine(psis_fl, a)
    x_fixed = uwt.shrink_and_combine(psis_fx, a, output="uint8")
    report = FixedReport(
        schedule=schedule.name,
        formats=schedule.rows(),
        overflow_count=counter.count,
        max_subband_error=float(np.abs(bands_fx - bands_fl).max()),
        max_synthesis_error=float(np.abs(psis_fx - psis_fl).max()),
    )
    if reference is not None:
        ref = np.asarray(reference, dtype=np.float64)
        report.psnr_fixed = metrics.psnr(ref, x_fixed, peak=peak)
        report.psnr_float = metrics.psnr(ref, x_float, peak=peak)
    if diag is not None:
        diag.extra["fixed_point"] = report.as_dict()
    return x_fixed, diag, report
