"""8-bit grayscale image files: PGM (P2/P5) natively, PNG through Pillow."""
import os
import re

import numpy as np

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class ImageFormatError(ValueError):
    pass


class MalformedHeaderError(ImageFormatError):
    pass


class BitDepthError(ImageFormatError):
    pass


class TruncatedPayloadError(ImageFormatError):
    pass


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _tokens(data, start, count):
    """``count`` whitespace-separated header tokens, skipping comments."""
    out, pos = [], start
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeaderError("PGM header ends early")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def parse_pgm(data, name="<bytes>"):
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeaderError(f"{name}: not a PGM file (magic {magic!r})")
    toks, pos = _tokens(data, 2, 3)
    try:
        width, height, maxval = (int(t) for t in toks)
    except ValueError:
        raise MalformedHeaderError(f"{name}: non-numeric PGM header field in {toks}") from None
    if width <= 0 or height <= 0:
        raise MalformedHeaderError(f"{name}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise BitDepthError(f"{name}: maxval {maxval} is not 8-bit (need 1..255)")
    n = width * height
    if magic == b"P5":
        payload = data[pos + 1:pos + 1 + n]  # exactly one whitespace byte after maxval
        if len(payload) < n:
            raise TruncatedPayloadError(f"{name}: expected {n} pixel bytes, got {len(payload)}")
        pixels = np.frombuffer(payload, dtype=np.uint8)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(text) < n:
            raise TruncatedPayloadError(f"{name}: expected {n} pixel values, got {len(text)}")
        try:
            pixels = np.array([int(t) for t in text[:n]], dtype=np.int64)
        except ValueError:
            raise MalformedHeaderError(f"{name}: non-numeric pixel value") from None
    if pixels.max(initial=0) > maxval:
        raise BitDepthError(f"{name}: pixel value above maxval {maxval}")
    return pixels.reshape(height, width).astype(np.float64)


def _read_png(path):
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "1", "P"):
                raise BitDepthError(f"{path}: PNG mode {im.mode} is not 8-bit grayscale")
            if im.mode == "P":
                arr = np.asarray(im.convert("RGB"))
                if not (np.array_equal(arr[..., 0], arr[..., 1]) and np.array_equal(arr[..., 0], arr[..., 2])):
                    raise BitDepthError(f"{path}: palette PNG is not grayscale")
                return arr[..., 0].astype(np.float64)
            return np.asarray(im.convert("L"), dtype=np.float64)
    except (UnidentifiedImageError, SyntaxError, OSError) as e:
        if isinstance(e, ImageFormatError):
            raise
        raise TruncatedPayloadError(f"{path}: unreadable PNG ({e})") from None


def read_image(path):
    """Read an 8-bit grayscale PGM or PNG as a float64 ``(height, width)`` array."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(PNG_MAGIC):
        return _read_png(path)
    return parse_pgm(data, path)


def _as_8bit(img):
    x = np.asarray(img, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"can only write 2-D images, got shape {x.shape}")
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def encode_pgm(img):
    px = _as_8bit(img)
    h, w = px.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes()


def write_image(img, path):
    """Write as binary PGM (maxval 255), or PNG when ``path`` ends in .png.

    Values are rounded to nearest and clipped to 0..255.
    """
    path = os.fspath(path)
    if path.lower().endswith(".png"):
        from PIL import Image

        Image.fromarray(_as_8bit(img)).save(path)
        return
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))
