"""Distribution-free image denoising with undecimated Haar subbands and a
generic risk estimator, plus fixed-point and hardware-cost models."""
from ._backend import NAME as backend
from .costmodel import CostQuery, additions_per_pixel, bram_count
from .filters import HaarKernel, band_layout, band_names
from .fixedpoint import FormatSchedule, QFormat, pipeline_fixed, quantize
from .genre import (
    GramSystem,
    SolverConfig,
    accumulate_gram,
    denoise,
    genre_risk,
    solve_closed_form,
    solve_gradient_descent,
    trace_terms,
)
from .image import NoiseModel, add_noise, devectorize, row_vectorize
from .io import read_image, write_image
from .metrics import SsimParams, psnr, ssim
from .uwt import REALIZATIONS, SubbandSet, decompose, decompose_recursive, recompose, shrink_and_combine

__version__ = "0.1.0"
