"""Addition counts and block-RAM budgets of the filter-bank realizations.

Additions are exact rationals per output pixel.  Memory is modelled as a
buffer inventory per realization and phase:

* a *line buffer* realizing a delay of ``k`` image rows keeps ``k - 1`` full
  rows in block RAM; the remaining ``width`` samples sit in the short
  ``k``-sample shift register that every tap line already has;
* a *row buffer* holds one previous result row (``width`` samples), needed
  by column recursions on a row-streamed image;
* short shift registers live in fabric registers, not block RAM.

A 36 Kb block holds 2048 words at widths 10..18, 1024 at 19..36, and so on
(the parity bits are usable only in the 9/18/36/72-bit shapes).  The
rational count is stored words over block depth; the physical count is its
ceiling.

With the hardware's streaming order the first level-``J`` output appears
``(L/2) * width + L/2`` clock cycles after the first input pixel
(``16 * 512 + 16`` for ``J = 5`` on 512-wide images); this is the skew the
time-alignment delays absorb and it is reported by :func:`alignment_skew`.
"""
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

from .uwt import REALIZATIONS

PHASES = ("decomposition", "recomposition")
BRAM_REALIZATIONS = ("UWT-1D", "UWT-2D", "RUWT-1D", "RUWT-2D")


@dataclass(frozen=True)
class CostQuery:
    realization: str
    phase: str
    level: int = 5
    image_width: int = 512
    buffer_bit_width: int = 16
    bram_bits: int = 36 * 1024

    def __post_init__(self):
        if self.realization not in REALIZATIONS:
            raise ValueError(f"unknown realization {self.realization!r}")
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.image_width < 1 or self.buffer_bit_width < 1 or self.bram_bits < 72:
            raise ValueError("width, bit width and block size must be positive")

    @property
    def L(self):
        return 2**self.level


def additions_per_pixel(q):
    """Average additions per output pixel as a :class:`~fractions.Fraction`."""
    L = q.L
    dec = q.phase == "decomposition"
    table = {
        "UWT-1D": (Fraction(6, 4), Fraction(6)),
        "UWT-2D": (Fraction(8, 4), Fraction(12)),
        "CONV-COMBINED-1D": (Fraction(6, 4) * (L - 1), Fraction(2 * (L - 1))),
        "CONV-COMBINED-2D": (Fraction(L * L - 1), Fraction(L * L - 1)),
        "RUWT-1D": (Fraction(15, 4), Fraction(5)),
        "RUWT-2D": (Fraction(4 + 3 * 4, 4), Fraction(4 + 3)),
    }
    return table[q.realization][0 if dec else 1]


@dataclass(frozen=True)
class Buffer:
    kind: str  # "line", "row" or "shift"
    rows: int  # delay in rows for line buffers, 1 for row buffers, 0 for shift registers
    length: int  # samples for shift registers
    count: int

    def words(self, width):
        if self.kind == "line":
            return (self.rows - 1) * width * self.count
        if self.kind == "row":
            return width * self.count
        return 0


def buffer_inventory(q):
    """Buffers needed by one filtering level."""
    if q.realization not in BRAM_REALIZATIONS:
        raise ValueError(f"no buffer inventory for {q.realization}")
    L, half = q.L, q.L // 2
    dec = q.phase == "decomposition"
    if q.realization == "UWT-1D":
        return [Buffer("shift", 0, half, 1 if dec else 4), Buffer("line", half, 0, 2 if dec else 4)]
    if q.realization == "UWT-2D":
        return [Buffer("shift", 0, half, 1 if dec else 4), Buffer("line", half, 0, 1 if dec else 4)]
    if q.realization == "RUWT-1D":
        return [Buffer("shift", 0, L, 1 if dec else 2), Buffer("line", L, 0, 2 if dec else 4),
                Buffer("row", 1, 0, 4)]
    # RUWT-2D: one short and two line buffers per channel; decomposition
    # channels read the same input and share half of the line buffers
    return [Buffer("shift", 0, half, 4 if dec else 8), Buffer("line", half, 0, 4 if dec else 8)]


def bram_depth(bit_width, bram_bits=36 * 1024):
    """Words of ``bit_width`` bits one block can hold."""
    for shape in (1, 2, 4, 9, 18, 36, 72):
        if bit_width <= shape:
            data_bits = bram_bits if shape >= 9 else bram_bits * 8 // 9
            return data_bits // shape
    raise ValueError(f"{bit_width}-bit words exceed the widest block shape")


@dataclass(frozen=True)
class BramCount:
    rational: Fraction
    blocks: int
    words: int


def bram_count(q):
    words = sum(b.words(q.image_width) for b in buffer_inventory(q))
    r = Fraction(words, bram_depth(q.buffer_bit_width, q.bram_bits))
    return BramCount(r, math.ceil(r), words)


def alignment_skew(level, width=512):
    half = 2**level // 2
    return half * width + half


def _fmt_adds(x):
    return f"{float(x):.2f}"


def _fmt_rational(r):
    return f"{float(r):g}"


TABLE_ROWS = (
    ("1D UWT", "UWT-1D"),
    ("2D UWT", "UWT-2D"),
    ("1D Convolution", "CONV-COMBINED-1D"),
    ("2D Convolution", "CONV-COMBINED-2D"),
    ("1D RUWT", "RUWT-1D"),
    ("2D RUWT", "RUWT-2D"),
)


def additions_table(level=5):
    return [(name, *(additions_per_pixel(CostQuery(r, p, level)) for p in PHASES))
            for name, r in TABLE_ROWS]


def bram_table(level=5, width=512, bit_width=16):
    return [(name, *(bram_count(CostQuery(r, p, level, width, bit_width)) for p in PHASES))
            for name, r in TABLE_ROWS if r in BRAM_REALIZATIONS]


def tables_csv(level=5, width=512, bit_width=16):
    """Both tables as CSV text: additions, then block RAMs as the exact
    fractional count and the whole blocks it occupies."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["table", "method", "decomposition", "recomposition",
                "decomposition_blocks", "recomposition_blocks"])
    for name, d, r in additions_table(level):
        w.writerow(["additions_per_pixel", name, _fmt_adds(d), _fmt_adds(r), "", ""])
    for name, d, r in bram_table(level, width, bit_width):
        w.writerow(["bram36", name, _fmt_rational(d.rational), _fmt_rational(r.rational),
                    d.blocks, r.blocks])
    return out.getvalue()
