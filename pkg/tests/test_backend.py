"""The compiled kernels and their numpy fallback must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest

from genre_haar import _backend
from genre_haar._backend import available

pytestmark = pytest.mark.skipif("cython" not in available(), reason="compiled kernels not built")


@pytest.fixture
def pair():
    ks = available()
    return ks["python"], ks["cython"]


@pytest.mark.parametrize("L", [1, 2, 16, 32])
@pytest.mark.parametrize("dtype", [np.float64, np.int64])
def test_box_sum(pair, rng, L, dtype):
    x = rng.integers(-1000, 1000, (7, 64)).astype(dtype)
    a, b = (k.box_sum(x, L) for k in pair)
    assert a.dtype == b.dtype == dtype
    assert np.array_equal(a, b) if dtype == np.int64 else np.allclose(a, b, rtol=0, atol=1e-9)


@pytest.mark.parametrize("L", [2, 8, 32])
def test_wavelet_sum(pair, rng, L):
    x = rng.integers(-1000, 1000, (5, 64)).astype(np.int64)
    a, b = (k.wavelet_sum(x, L) for k in pair)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("causal", [True, False])
def test_conv2d(pair, rng, causal):
    x = rng.normal(size=(16, 24))
    kern = rng.normal(size=(4, 4))
    a, b = (k.conv2d_circular(x, kern, causal) for k in pair)
    assert np.allclose(a, b, atol=1e-12)


def test_gram(pair, rng):
    psi = rng.normal(size=(16, 4096))
    y = rng.normal(size=4096)
    (qa, ba), (qb, bb) = (k.gram_upper(psi, y) for k in pair)
    assert np.allclose(qa, qb, rtol=1e-12) and np.allclose(ba, bb, rtol=1e-12)


def test_gradient_descent(pair, rng):
    A = rng.normal(size=(6, 6))
    Q = A @ A.T + 6 * np.eye(6)
    c = rng.normal(size=6)
    mu = 1.0 / np.linalg.eigvalsh(Q)[-1]
    ra, rb = (k.gradient_descent(Q, c, np.ones(6), mu, 5000, 1e-12, 10.0) for k in pair)
    assert ra[1] == rb[1]
    assert np.allclose(ra[0], rb[0], rtol=1e-12, atol=1e-14)
    assert not ra[4]


def test_gradient_descent_divergence(pair):
    Q = np.diag([1.0, 3.0])
    for k in pair:
        *_, diverged = k.gradient_descent(Q, np.zeros(2), np.ones(2), 1.0, 100, 1e-12, 10.0)
        assert diverged


def test_env_forces_python():
    env = dict(os.environ, GENRE_HAAR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from genre_haar import _backend; print(_backend.NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_default_is_compiled():
    if os.environ.get("GENRE_HAAR_PURE_PYTHON"):
        pytest.skip("pure-python run requested")
    assert _backend.NAME == "cython"


def test_benchmark_runs(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    bench.main(["--size", "64", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "denoise (closed form)" in out and "speedup" in out
