import os
from pathlib import Path

import numpy as np
import pytest

from genre_haar import _backend, genre, uwt
from genre_haar import io as imageio

DATA = Path(__file__).parent / "data"
STANDARD_IMAGES = ("lena", "tank", "boat", "house")


def find_image(name):
    """Path of a standard 512x512 test image, or None.

    Looks in tests/data, then in the directory named by GENRE_CORPUS.
    """
    dirs = [DATA]
    if os.environ.get("GENRE_CORPUS"):
        dirs.append(Path(os.environ["GENRE_CORPUS"]))
    for d in dirs:
        for ext in (".pgm", ".png"):
            p = d / f"{name}{ext}"
            if p.exists():
                return p
    return None


def load_image(name):
    p = find_image(name)
    return None if p is None else imageio.read_image(p)


@pytest.fixture(scope="session")
def lena():
    img = load_image("lena")
    if img is None:
        pytest.skip("lena test image missing")
    return img


@pytest.fixture(params=sorted(_backend.available()))
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    k = _backend.available()[request.param]
    monkeypatch.setattr(uwt, "kernels", k)
    monkeypatch.setattr(genre, "kernels", k)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Store the verdict for ``criterion`` and return ``ok``."""
    ACCEPTANCE[criterion] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
