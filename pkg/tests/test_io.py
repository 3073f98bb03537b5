import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from genre_haar import io as gio


class TestParsePgm:
    def test_p5_two_by_two(self):
        img = gio.parse_pgm(b"P5\n2 2\n255\n" + bytes([0, 255, 17, 42]))
        assert img.dtype == np.float64
        assert img.tolist() == [[0, 255], [17, 42]]

    def test_p2_matches_p5(self):
        p2 = gio.parse_pgm(b"P2\n# a comment\n2 2\n255\n0 255\n17 42\n")
        p5 = gio.parse_pgm(b"P5 2 2 255\n" + bytes([0, 255, 17, 42]))
        assert np.array_equal(p2, p5)

    def test_comment_between_fields(self):
        img = gio.parse_pgm(b"P5\n# made by hand\n3 # width\n1\n255\n" + bytes([1, 2, 3]))
        assert img.shape == (1, 3)

    def test_smaller_maxval(self):
        assert gio.parse_pgm(b"P2 2 1 15 3 15").tolist() == [[3, 15]]

    @pytest.mark.parametrize("data,error", [
        (b"P6\n2 2\n255\n" + bytes(12), gio.MalformedHeaderError),
        (b"P5\n2 x\n255\n" + bytes(4), gio.MalformedHeaderError),
        (b"P5\n2", gio.MalformedHeaderError),
        (b"P5\n0 2\n255\n", gio.MalformedHeaderError),
        (b"P5\n2 2\n65535\n" + bytes(8), gio.BitDepthError),
        (b"P2 2 1 15 3 16", gio.BitDepthError),
        (b"P5\n2 2\n255\n" + bytes(3), gio.TruncatedPayloadError),
        (b"P2 2 2 255 1 2 3", gio.TruncatedPayloadError),
    ])
    def test_errors_are_distinct(self, data, error):
        with pytest.raises(error):
            gio.parse_pgm(data)

    def test_errors_are_value_errors(self):
        assert issubclass(gio.TruncatedPayloadError, gio.ImageFormatError)
        assert issubclass(gio.ImageFormatError, ValueError)


class TestFiles:
    def test_lena_fixture_shape(self, lena):
        assert lena.shape == (512, 512) and 0 <= lena.min() and lena.max() <= 255

    def test_pgm_round_trip(self, tmp_path, rng):
        img = rng.integers(0, 256, (5, 7)).astype(float)
        p = tmp_path / "a.pgm"
        gio.write_image(img, p)
        assert p.read_bytes().startswith(b"P5\n7 5\n255\n")
        assert np.array_equal(gio.read_image(p), img)

    def test_png_round_trip(self, tmp_path, rng):
        img = rng.integers(0, 256, (6, 9)).astype(float)
        p = tmp_path / "a.png"
        gio.write_image(img, p)
        assert p.read_bytes()[:8] == gio.PNG_MAGIC
        assert np.array_equal(gio.read_image(p), img)

    def test_rgb_png_rejected(self, tmp_path):
        from PIL import Image

        p = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4), (10, 20, 30)).save(p)
        with pytest.raises(gio.BitDepthError):
            gio.read_image(p)

    def test_truncated_png(self, tmp_path):
        p = tmp_path / "bad.png"
        p.write_bytes(gio.PNG_MAGIC + b"\x00" * 10)
        with pytest.raises(gio.TruncatedPayloadError):
            gio.read_image(p)

    def test_write_rounds_and_clips(self, tmp_path):
        p = tmp_path / "c.pgm"
        gio.write_image(np.array([[-4.0, 0.5, 1.49, 300.0]]), p)
        assert gio.read_image(p).tolist() == [[0, 1, 1, 255]]

    def test_write_rejects_3d(self, tmp_path):
        with pytest.raises(ValueError):
            gio.write_image(np.zeros((2, 2, 3)), tmp_path / "x.pgm")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            gio.read_image(tmp_path / "nope.pgm")


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 20))), st.sampled_from([".pgm", ".png"]))
def test_write_read_identity(tmp_path_factory, img, ext):
    p = tmp_path_factory.mktemp("rt") / f"img{ext}"
    gio.write_image(img, p)
    assert np.array_equal(gio.read_image(p), img)
