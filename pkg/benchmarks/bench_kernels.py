"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]

Each row is the best of ``--repeat`` runs.  The pipeline rows swap the
kernel module used by the transform and solver code, so they show what
the compiled core buys end to end.
"""
import argparse
import timeit

import numpy as np

from genre_haar import genre, uwt
from genre_haar._backend import available


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(k, size, rng):
    x = rng.uniform(0, 255, (size, size))
    xi = rng.integers(0, 256, (size, size)).astype(np.int64)
    psis = rng.normal(size=(16, size * size))
    y = rng.normal(size=size * size)
    A = rng.normal(size=(16, 16))
    Q = A @ A.T / 16 + np.eye(16)
    c = rng.normal(size=16)
    mu = 1.0 / np.linalg.eigvalsh(Q)[-1]
    small = rng.normal(size=(64, 64))
    kern = rng.normal(size=(8, 8))
    return {
        "box_sum L=16 (float)": lambda: k.box_sum(x, 16),
        "box_sum L=16 (int64)": lambda: k.box_sum(xi, 16),
        "wavelet_sum L=32 (int64)": lambda: k.wavelet_sum(xi, 32),
        "conv2d_circular 64x64, 8x8": lambda: k.conv2d_circular(small, kern, True),
        "gram_upper 16 bands": lambda: k.gram_upper(psis, y),
        "gradient_descent 20000 steps": lambda: k.gradient_descent(Q, c, np.ones(16), mu, 20000, 0.0, 10.0),
    }


def pipeline_cases(size, rng):
    y = rng.uniform(0, 255, (size, size))
    return {
        "decompose RUWT-2D": lambda: uwt.decompose(y, 5, "RUWT-2D"),
        "recompose RUWT-2D": lambda: uwt.recompose(uwt.decompose(y, 5)),
        "denoise (closed form)": lambda: genre.denoise(y, 25.0),
    }


def use(k):
    uwt.kernels = k
    genre.kernels = k


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = available()
    names = sorted(backends)
    if len(names) < 2:
        print("compiled kernels are not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    rows = []
    for label in kernel_cases(backends["python"], args.size, rng):
        times = {}
        for n in names:
            case = kernel_cases(backends[n], args.size, np.random.default_rng(0))[label]
            times[n] = best(case, args.repeat)
        rows.append((label, times))
    original = uwt.kernels
    try:
        for label in pipeline_cases(args.size, rng):
            times = {}
            for n in names:
                use(backends[n])
                case = pipeline_cases(args.size, np.random.default_rng(0))[label]
                times[n] = best(case, args.repeat)
            rows.append((label, times))
    finally:
        use(original)

    header = f"{'case':<32}" + "".join(f"{n + ' [ms]':>16}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(f"{args.size}x{args.size}, best of {args.repeat}")
    print(header)
    for label, times in rows:
        line = f"{label:<32}" + "".join(f"{1e3 * times[n]:>16.2f}" for n in names)
        if len(names) > 1:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
