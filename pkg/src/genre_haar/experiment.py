"""One denoising experiment: add noise to a clean image, denoise, measure."""
from dataclasses import dataclass, field

import numpy as np

from . import fixedpoint, genre, image, metrics

PRECISIONS = ("float", "fixed", "fixed-full")
PEAK_MODES = ("reference", "observation", "8bit")


@dataclass
class CaseResult:
    noisy: np.ndarray
    output: np.ndarray  # 8-bit valued, as written to disk
    diagnostics: genre.Diagnostics
    input_psnr: float
    input_ssim: float
    output_psnr: float
    output_ssim: float
    peak: float
    fixed_report: object = None
    flags: dict = field(default_factory=dict)

    @property
    def psnr_gain(self):
        return self.output_psnr - self.input_psnr


def observe(clean, model, quantize_input=False):
    y = image.add_noise(clean, model)
    return image.quantize_8bit(y) if quantize_input else y


def denoise_observation(y, sigma, precision="float", cfg=None, levels=5,
                        realization="UWT-2D", synthesis="RUWT-2D"):
    """Denoise ``y`` at ``precision``; returns ``(x_hat_8bit, diagnostics, fixed_report)``."""
    if precision not in PRECISIONS:
        raise ValueError(f"unknown precision {precision!r}")
    cfg = cfg or genre.SolverConfig()
    if precision == "float":
        x, diag = genre.denoise(y, sigma, cfg, realization, synthesis, levels)
        return image.quantize_8bit(x), diag, None
    schedule = fixedpoint.FormatSchedule.named("truncated" if precision == "fixed" else "full", levels)
    x, diag, rep = fixedpoint.pipeline_fixed(y, sigma, cfg, schedule)
    return x.astype(np.float64), diag, rep


def run_case(clean, model, precision="float", quantize_input=True, peak_mode="observation",
             cfg=None, levels=5, realization="UWT-2D", synthesis="RUWT-2D", ssim_params=None):
    """Noise, denoise and score one clean image.

    PSNR peak follows ``peak_mode``; SSIM is windowed with dynamic range 255.
    """
    if peak_mode not in PEAK_MODES:
        raise ValueError(f"unknown peak mode {peak_mode!r}")
    clean = image.as_image(clean)
    y = observe(clean, model, quantize_input)
    x, diag, rep = denoise_observation(y, model.sigma, precision, cfg, levels, realization, synthesis)
    peak = metrics.peak_for(peak_mode, clean, y)
    sp = ssim_params or metrics.SsimParams()
    return CaseResult(
        noisy=y,
        output=x,
        diagnostics=diag,
        input_psnr=metrics.psnr(clean, y, peak),
        input_ssim=metrics.ssim(clean, y, sp),
        output_psnr=metrics.psnr(clean, x, peak),
        output_ssim=metrics.ssim(clean, x, sp),
        peak=peak,
        fixed_report=rep,
    )
