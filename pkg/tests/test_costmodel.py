import csv
import io
from fractions import Fraction

import numpy as np
import pytest

from genre_haar import costmodel as cm, uwt
from genre_haar.costmodel import CostQuery

ADDITIONS = {
    ("UWT-1D", "decomposition"): "1.50",
    ("UWT-1D", "recomposition"): "6.00",
    ("UWT-2D", "decomposition"): "2.00",
    ("UWT-2D", "recomposition"): "12.00",
    ("CONV-COMBINED-1D", "decomposition"): "46.50",
    ("CONV-COMBINED-1D", "recomposition"): "62.00",
    ("CONV-COMBINED-2D", "decomposition"): "1023.00",
    ("CONV-COMBINED-2D", "recomposition"): "1023.00",
    ("RUWT-1D", "decomposition"): "3.75",
    ("RUWT-1D", "recomposition"): "5.00",
    ("RUWT-2D", "decomposition"): "4.00",
    ("RUWT-2D", "recomposition"): "7.00",
}

# cells as printed; a fractional cell is the exact block count, an integer
# cell may also be the whole number of blocks occupied
BRAMS = {
    ("UWT-1D", "decomposition"): "7.5",
    ("UWT-1D", "recomposition"): "15",
    ("UWT-2D", "decomposition"): "4",
    ("UWT-2D", "recomposition"): "15",
    ("RUWT-1D", "decomposition"): "17",
    ("RUWT-1D", "recomposition"): "32",
    ("RUWT-2D", "decomposition"): "15",
    ("RUWT-2D", "recomposition"): "30",
}


class TestAdditions:
    @pytest.mark.parametrize("key", sorted(ADDITIONS))
    def test_golden(self, key):
        assert f"{float(cm.additions_per_pixel(CostQuery(*key))):.2f}" == ADDITIONS[key]

    def test_exact_fractions(self):
        assert cm.additions_per_pixel(CostQuery("UWT-1D", "decomposition")) == Fraction(3, 2)
        assert cm.additions_per_pixel(CostQuery("RUWT-1D", "decomposition")) == Fraction(15, 4)

    @pytest.mark.parametrize("level", [1, 2, 3, 4, 5])
    def test_uwt_independent_of_level(self, level):
        assert cm.additions_per_pixel(CostQuery("UWT-2D", "decomposition", level)) == 2

    @pytest.mark.parametrize("level,expected", [(1, 3), (3, 63), (5, 1023)])
    def test_conv2d_grows(self, level, expected):
        assert cm.additions_per_pixel(CostQuery("CONV-COMBINED-2D", "recomposition", level)) == expected

    def test_table(self):
        rows = cm.additions_table(5)
        assert [r[0] for r in rows] == [name for name, _ in cm.TABLE_ROWS]


class TestBram:
    @pytest.mark.parametrize("key", sorted(BRAMS))
    def test_golden(self, key):
        c = cm.bram_count(CostQuery(*key))
        cell = Fraction(BRAMS[key])
        if cell.denominator == 1:
            assert cell in (c.rational, c.blocks)
        else:
            assert c.rational == cell

    def test_spec_examples(self):
        assert cm.bram_count(CostQuery("UWT-2D", "decomposition")).blocks == 4
        assert cm.bram_count(CostQuery("RUWT-1D", "recomposition")).blocks == 32

    @pytest.mark.parametrize("realization", cm.BRAM_REALIZATIONS)
    @pytest.mark.parametrize("phase", cm.PHASES)
    def test_monotone_in_level(self, realization, phase):
        counts = [cm.bram_count(CostQuery(realization, phase, j)).rational for j in range(1, 8)]
        assert counts == sorted(counts)

    @pytest.mark.parametrize("realization", cm.BRAM_REALIZATIONS)
    def test_monotone_in_bit_width(self, realization):
        counts = [cm.bram_count(CostQuery(realization, "recomposition", buffer_bit_width=b)).blocks
                  for b in range(1, 37)]
        assert counts == sorted(counts)

    @pytest.mark.parametrize("realization", cm.BRAM_REALIZATIONS)
    def test_monotone_in_width(self, realization):
        counts = [cm.bram_count(CostQuery(realization, "decomposition", image_width=w)).rational
                  for w in (64, 128, 256, 512, 1024)]
        assert counts == sorted(counts)

    def test_level_one_small(self):
        for r in cm.BRAM_REALIZATIONS:
            for p in cm.PHASES:
                assert cm.bram_count(CostQuery(r, p, 1)).blocks <= 2

    @pytest.mark.parametrize("bits,depth", [(1, 32768), (9, 4096), (16, 2048), (18, 2048), (32, 1024), (72, 512)])
    def test_depth(self, bits, depth):
        assert cm.bram_depth(bits) == depth

    def test_depth_too_wide(self):
        with pytest.raises(ValueError):
            cm.bram_depth(73)

    def test_convolution_has_no_inventory(self):
        with pytest.raises(ValueError):
            cm.bram_count(CostQuery("CONV-COMBINED-2D", "decomposition"))


class TestQuery:
    @pytest.mark.parametrize("kwargs", [
        {"realization": "FFT", "phase": "decomposition"},
        {"realization": "UWT-2D", "phase": "synthesis"},
        {"realization": "UWT-2D", "phase": "decomposition", "level": 0},
        {"realization": "UWT-2D", "phase": "decomposition", "image_width": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            CostQuery(**kwargs)

    def test_alignment_skew(self):
        assert cm.alignment_skew(5) == 16 * 512 + 16


class TestCsv:
    def test_rows(self):
        rows = list(csv.DictReader(io.StringIO(cm.tables_csv())))
        assert len(rows) == 10
        adds = {r["method"]: r for r in rows if r["table"] == "additions_per_pixel"}
        assert adds["2D Convolution"]["decomposition"] == "1023.00"
        brams = {r["method"]: r for r in rows if r["table"] == "bram36"}
        assert brams["1D UWT"]["decomposition"] == "7.5"
        assert brams["2D UWT"]["decomposition_blocks"] == "4"


@pytest.mark.slow
@pytest.mark.parametrize("realization", uwt.REALIZATIONS)
def test_counter_matches_table(realization):
    """Instrumented transforms on a 512x512 image at level 5."""
    y = np.random.default_rng(5).uniform(0, 255, (512, 512))
    dec, rec = uwt.AdditionCounter(), uwt.AdditionCounter()
    bands = uwt.decompose(y, 5, realization, counter=dec)
    if realization.startswith("UWT"):
        uwt.reconstruct(bands, realization, counter=rec)
    else:
        uwt.recompose(bands, realization, counter=rec)
    for phase, counter in zip(cm.PHASES, (dec, rec)):
        expected = float(cm.additions_per_pixel(CostQuery(realization, phase)))
        assert counter.per_output(5) == pytest.approx(expected, abs=0.1)
