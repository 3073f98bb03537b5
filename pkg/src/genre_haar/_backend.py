"""Pick the compiled kernels when available, the numpy ones otherwise.

Set ``GENRE_HAAR_PURE_PYTHON=1`` to force the numpy kernels.
"""
import os

from . import _kernels_py

python_kernels = _kernels_py
compiled_kernels = None

try:
    from . import _kernels as compiled_kernels  # type: ignore[no-redef]
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and not os.environ.get("GENRE_HAAR_PURE_PYTHON"):
    kernels = compiled_kernels
    NAME = "cython"
else:
    kernels = python_kernels
    NAME = "python"


def available():
    """Names and modules of every importable kernel backend."""
    out = {"python": python_kernels}
    if compiled_kernels is not None:
        out["cython"] = compiled_kernels
    return out
