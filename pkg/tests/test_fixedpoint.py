import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genre_haar import filters, fixedpoint as fx, uwt
from genre_haar.fixedpoint import FormatSchedule, OverflowCounter, QFormat

Q72 = QFormat(True, 7, 2)


class TestQFormat:
    def test_signed_range(self):
        assert Q72.min_value == -128 and Q72.max_value == 127.75 and Q72.lsb == 0.25
        assert Q72.width == 10

    def test_unsigned_range(self):
        f = QFormat(False, 8, 6)
        assert f.min_value == 0 and f.max_value == 256 - 2**-6

    def test_str(self):
        assert str(Q72) == "Q7.2"
        assert "unsigned" in str(QFormat(False, 8, 0))

    @pytest.mark.parametrize("args", [(True, 7, 25), (True, -1, 2), (False, 8, -1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            QFormat(*args)


class TestQuantize:
    def test_zero(self):
        assert fx.quantize(0.0, Q72) == 0.0
        assert fx.quantize(0.0, QFormat(False, 8, 10), "round-nearest") == 0.0

    def test_truncate(self):
        assert fx.quantize(1.30, Q72) == 1.25

    def test_truncate_negative_goes_down(self):
        # dropping bits of a two's-complement pattern moves toward minus infinity
        assert fx.quantize(-1.30, Q72) == -1.5

    def test_round_nearest_ties_away(self):
        assert fx.quantize(1.125, Q72, "round-nearest") == 1.25
        assert fx.quantize(-1.125, Q72, "round-nearest") == -1.25
        assert fx.quantize(1.1, Q72, "round-nearest") == 1.0

    @pytest.mark.parametrize("mode", fx.MODES)
    def test_saturation(self, mode):
        c = OverflowCounter()
        assert fx.quantize(200.0, Q72, mode, c) == 127.75
        assert c.flag and c.count == 1
        assert fx.quantize(-500.0, Q72, mode, c) == -128.0
        assert c.count == 2

    def test_no_overflow_in_range(self):
        c = OverflowCounter()
        fx.quantize(np.linspace(-128, 127.75, 50), Q72, counter=c)
        assert not c.flag

    def test_array_in_array_out(self):
        out = fx.quantize(np.array([0.3, 0.6]), Q72)
        assert out.tolist() == [0.25, 0.5]

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            fx.quantize(1.0, Q72, "stochastic")

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-300, 300), st.sampled_from(fx.MODES), st.integers(0, 12), st.booleans())
    def test_idempotent(self, x, mode, frac, signed):
        f = QFormat(signed, 7 if signed else 8, frac)
        once = fx.quantize(x, f, mode)
        assert fx.quantize(once, f, mode) == once
        assert once * 2**frac == round(once * 2**frac)
        assert f.min_value <= once <= f.max_value

    def test_requantize_shift(self):
        # 13 at 4 fraction bits is 0.8125; truncating to 2 bits gives 0.75
        assert fx.requantize(np.array([13]), 4, Q72).tolist() == [3]
        assert fx.from_int(np.array([3]), Q72).tolist() == [0.75]


class TestSchedule:
    def test_full_decomposition(self):
        assert [fmt for _, fmt, _ in FormatSchedule.full().rows()] == ["Q7.2", "Q7.4", "Q7.6", "Q7.8", "Q7.10"]

    def test_full_recomposition(self):
        assert [fmt for *_, fmt in FormatSchedule.full().rows()] == ["Q7.4", "Q7.8", "Q7.12", "Q7.16", "Q7.20"]

    def test_truncated_recomposition(self):
        assert [fmt for *_, fmt in FormatSchedule.truncated().rows()] == ["Q7.4", "Q7.6", "Q7.6", "Q7.6", "Q7.6"]

    def test_truncated_fits_16_bits(self):
        s = FormatSchedule.truncated()
        for j in range(1, 6):
            for kind in ("LL", "HH"):
                assert s.decomposition_format(j, kind).width <= 16
                assert s.recomposition_format(j, kind).width <= 16

    def test_ll_unsigned_eight_integer_bits(self):
        f = FormatSchedule.full().decomposition_format(3, "LL")
        assert not f.signed and f.int_bits == 8 and f.frac_bits == 6

    def test_named(self):
        assert FormatSchedule.named("full", 3).levels == 3
        with pytest.raises(ValueError):
            FormatSchedule.named("half")


def impulse(value=255, size=32):
    x = np.zeros((size, size))
    x[0, 0] = value
    return x


class TestDecomposeFixed:
    @pytest.mark.parametrize("schedule", ["full", "truncated"])
    @pytest.mark.parametrize("levels", [1, 2, 3, 4, 5])
    def test_constant_255(self, schedule, levels):
        c = OverflowCounter()
        sched = FormatSchedule.named(schedule, levels)
        ints, fracs = fx.decompose_fixed(np.full((32, 32), 255), sched, counter=c)
        assert np.all(fx.from_int(ints[-1], fracs[-1]) == 255.0)
        assert not ints[:-1].any() and not c.flag

    def test_impulse_hh(self):
        ints, fracs = fx.decompose_fixed(impulse(), FormatSchedule.truncated())
        hh = fx.from_int(ints[2], fracs[2])
        assert sorted(set(hh[:2, :2].ravel())) == [-63.75, 63.75]
        assert not hh[2:].any()

    def test_matches_float_when_untruncated(self, rng):
        """Under the full schedule every level is exact."""
        y = rng.integers(0, 256, (32, 32))
        ints, fracs = fx.decompose_fixed(y, FormatSchedule.full())
        real = np.stack([fx.from_int(v, f) for v, f in zip(ints, fracs)])
        assert np.array_equal(real, uwt.decompose(y.astype(float), 5).data)

    def test_level_one_error_bound(self, lena):
        ints, fracs = fx.decompose_fixed(lena, FormatSchedule.truncated())
        ref = uwt.decompose(lena.astype(float), 5)
        for k in range(3):
            assert np.abs(fx.from_int(ints[k], fracs[k]) - ref.data[k]).max() <= 2**-3

    def test_accumulated_error_bound(self, rng):
        """Each level adds at most one output ulp; averaging never grows it."""
        y = rng.integers(0, 256, (64, 64))
        s = FormatSchedule.truncated()
        bands, psis = fx.fixed_synthesis(y, s)
        ref = uwt.decompose(y.astype(float), 5)
        ref_psis = uwt.recompose(ref)
        for i, (j, _) in enumerate(filters.band_layout(5)):
            dec_bound = sum(2.0**-f for f in s.decomposition[:j])
            assert np.abs(bands[i] - ref.data[i]).max() <= dec_bound
            assert np.abs(psis[i] - ref_psis[i]).max() <= dec_bound + 2.0**-s.recomposition[j - 1]

    @pytest.mark.parametrize("bad", [np.full((32, 32), 256), np.full((32, 32), -1), np.full((32, 32), 1.5)])
    def test_rejects_non_8bit(self, bad):
        with pytest.raises(ValueError, match="8-bit"):
            fx.decompose_fixed(bad)


class TestNoOverflow:
    @pytest.mark.parametrize("schedule", ["full", "truncated"])
    def test_random_images(self, schedule):
        rng = np.random.default_rng(100)
        c = OverflowCounter()
        for _ in range(100):
            fx.fixed_synthesis(rng.integers(0, 256, (32, 32)), FormatSchedule.named(schedule), counter=c)
        # worst cases: checkerboards and extreme steps
        checker = (np.indices((32, 32)).sum(axis=0) % 2) * 255
        for img in (checker, 255 - checker, np.tri(32) * 255, impulse()):
            fx.fixed_synthesis(img, FormatSchedule.named(schedule), counter=c)
        assert c.count == 0

    def test_lena(self, lena):
        c = OverflowCounter()
        fx.fixed_synthesis(lena, counter=c)
        assert c.count == 0


class TestPipelineFixed:
    @pytest.mark.parametrize("schedule", ["full", "truncated"])
    def test_identity_alpha_is_exact(self, schedule, rng):
        y = rng.integers(0, 256, (64, 64))
        x, diag, rep = fx.pipeline_fixed(y, 0.0, schedule=FormatSchedule.named(schedule), alpha=np.ones(16))
        assert x.dtype == np.uint8 and np.array_equal(x, y)
        assert diag is None and rep.overflow_count == 0

    def test_sigma_zero_solves_to_input(self, rng):
        y = rng.integers(0, 256, (64, 64))
        x, diag, _ = fx.pipeline_fixed(y, 0.0)
        assert np.array_equal(x, y)

    def test_report(self, rng):
        clean = rng.integers(60, 200, (64, 64)).astype(float)
        y = np.clip(np.round(clean + rng.normal(0, 20, clean.shape)), 0, 255)
        x, diag, rep = fx.pipeline_fixed(y, 20.0, reference=clean)
        d = rep.as_dict()
        assert d["schedule"] == "truncated" and d["overflow_count"] == 0
        assert d["psnr_delta"] == pytest.approx(rep.psnr_fixed - rep.psnr_float)
        assert rep.psnr_fixed > rep.psnr_float - 0.5
        assert "fixed_point" in diag.extra

    def test_rejects_real_input(self):
        with pytest.raises(ValueError):
            fx.pipeline_fixed(np.full((32, 32), 10.5), 1.0)
