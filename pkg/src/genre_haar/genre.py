"""Generic risk estimation for subband-wise linear shrinkage.

For a linear denoiser ``x_hat = B y`` the quantity

    (||B y - y||^2 + 2 sigma^2 trace(B) - N sigma^2) / N

is an unbiased estimate of the MSE whatever the noise distribution, as long
as the noise is zero-mean, white, with variance sigma^2.  With
``B = sum_i alpha_i H_i`` and ``psi_i = H_i y`` it is a quadratic in alpha,
minimised by solving ``Q alpha = c`` where ``Q = Psi^T Psi``,
``c = Psi^T y - q`` and ``q_i = sigma^2 trace(H_i)``.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import filters, uwt
from ._backend import NAME as BACKEND
from ._backend import kernels

CONDITION_LIMIT = 1e12
DIVERGENCE_FACTOR = 10.0


class SolverError(RuntimeError):
    pass


class IllConditionedError(SolverError):
    def __init__(self, condition):
        super().__init__(f"Gram matrix is ill-conditioned (condition estimate {condition:.3e})")
        self.condition = condition


class DivergenceError(SolverError):
    def __init__(self, mu, lambda_max, residual0, residual):
        super().__init__(
            f"gradient descent diverged: residual grew from {residual0:.3e} to {residual:.3e}; "
            f"step {mu:.6g} violates mu < 2/lambda_max = {2 / lambda_max:.6g}"
        )
        self.mu = mu
        self.lambda_max = lambda_max


@dataclass
class GramSystem:
    """Normal equations of the risk: Q alpha = c with c = Psi^T y - q."""

    Q: np.ndarray
    psi_y: np.ndarray
    q: np.ndarray
    N: int
    sigma2: float = 0.0
    yy: float = 0.0  # ||y||^2, needed only to evaluate the risk

    @property
    def c(self):
        return self.psi_y - self.q

    def with_noise(self, q, sigma2):
        return GramSystem(self.Q, self.psi_y, np.asarray(q, dtype=np.float64), self.N, sigma2, self.yy)

    def risk(self, alpha):
        """Risk estimate from the Gram form, no pass over the pixels."""
        a = np.asarray(alpha, dtype=np.float64)
        sq = a @ self.Q @ a - 2 * a @ self.psi_y + self.yy
        return (sq + 2 * a @ self.q - self.N * self.sigma2) / self.N


@dataclass(frozen=True)
class SolverConfig:
    """How to solve ``Q alpha = c``.

    Gradient descent runs on ``Q / (N s)`` and ``c / (N s)`` where ``s`` is
    the smallest power of two with ``mu * ||Q / (N s)||_inf <= 1``
    (``normalization="pow2"``), or ``s = 1`` (``"pixels"``).  Either way the
    scale is a shift in hardware and leaves the solution unchanged.

    ``tol`` bounds the infinity-norm error of the returned coefficients:
    iteration stops once ``||r||_inf <= tol * lambda_min / sqrt(K)``, which
    implies ``||alpha - alpha*||_inf <= tol``.
    """

    method: str = "closed-form"
    mu: float = 2.0**-13
    max_iters: int = 20_000_000
    tol: float = 1e-6
    normalization: str = "pow2"

    def __post_init__(self):
        if self.method not in ("closed-form", "gradient-descent"):
            raise ValueError(f"unknown solver method {self.method!r}")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.normalization not in ("pow2", "pixels"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass
class SolverReport:
    method: str
    iterations: int = 0
    initial_residual: float = 0.0
    final_residual: float = 0.0
    converged: bool = True
    scale: float = 1.0
    lambda_max: float = float("nan")
    condition: float = float("nan")
    rank_deficient: bool = False

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class Diagnostics:
    alpha: np.ndarray
    risk: float
    report: SolverReport
    levels: int
    realization: str
    synthesis: str
    backend: str = BACKEND
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "alpha": [float(a) for a in self.alpha],
            "risk": float(self.risk),
            "solver": self.report.as_dict(),
            "levels": self.levels,
            "realization": self.realization,
            "synthesis": self.synthesis,
            "backend": self.backend,
            **self.extra,
        }


def genre_risk(psis, y, alpha, sigma2, q):
    """(||Psi alpha - y||^2 + 2 alpha.q - N sigma^2) / N.

    ``psis`` is ``(K, ..., H, W)`` and ``y`` is ``(..., H, W)``; leading
    dimensions give one risk per image.
    """
    psis = np.asarray(psis, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if psis.shape[1:] != y.shape or alpha.shape != (psis.shape[0],) or q.shape != alpha.shape:
        raise ValueError(
            f"shape mismatch: psis {psis.shape}, y {y.shape}, alpha {alpha.shape}, q {q.shape}"
        )
    N = y.shape[-1] * y.shape[-2]
    r = np.tensordot(alpha, psis, axes=1) - y
    sq = (r * r).sum(axis=(-2, -1))
    return (sq + 2 * alpha @ q - N * sigma2) / N


def accumulate_gram(psis, y):
    """Q = Psi^T Psi and Psi^T y in one streaming pass; q is left at zero."""
    psis = np.asarray(psis, dtype=np.float64)
    K = psis.shape[0]
    flat = np.ascontiguousarray(psis.reshape(K, -1))
    v = np.ascontiguousarray(np.asarray(y, dtype=np.float64).reshape(-1))
    if flat.shape[1] != v.size:
        raise ValueError("synthesis images and observation differ in size")
    Q, b = kernels.gram_upper(flat, v)
    return GramSystem(Q, b, np.zeros(K), v.size, 0.0, float(v @ v))


def trace_fractions(levels, width=None, height=None):
    """trace(H_i) / N as exact fractions, in band-layout order.

    For circular filtering, trace(R_i D_i) / N is the zero-lag term of the
    kernel's autocorrelation on the image torus: fold the kernel onto the
    torus and sum the squared taps.
    """
    out = []
    for j, kind in filters.band_layout(levels):
        k = filters.combined_2d(j, kind)
        if width is not None and height is not None:
            folded = np.zeros((height, width))
            for (k1, k2), v in np.ndenumerate(k):
                folded[k1 % height, k2 % width] += v
            k = folded
        out.append(sum((Fraction(float(v)) ** 2 for v in k.flat if v != 0), Fraction(0)))
    return out


def trace_terms(levels, width, height, sigma2):
    """q_i = sigma^2 trace(H_i)."""
    N = width * height
    return np.array([float(f * N) * sigma2 for f in trace_fractions(levels, width, height)])


def solve_closed_form(system):
    """alpha* = Q^{-1} c via Cholesky, refusing near-singular Q."""
    Q, c = system.Q, system.c
    cond = np.linalg.cond(Q)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedError(cond)
    try:
        factor = cho_factor(Q)
    except np.linalg.LinAlgError:
        raise IllConditionedError(cond) from None
    alpha = cho_solve(factor, c)
    resid = c - Q @ alpha
    if np.linalg.norm(resid) > 1e-8 * max(np.linalg.norm(c), np.finfo(float).tiny):
        alpha = alpha + cho_solve(factor, resid)
    return alpha


def _gd_scale(Qn, mu, normalization):
    if normalization == "pixels":
        return 1.0
    bound = np.abs(Qn).sum(axis=1).max()
    if bound == 0:
        return 1.0
    return 2.0 ** max(math.ceil(math.log2(mu * bound)), 0)


def _residual_threshold(tol, eig, Qn):
    """Residual level that certifies an alpha error of at most ``tol``.

    For a singular system no such certificate exists and the residual is
    driven down to rounding level instead."""
    floor = 64 * np.finfo(float).eps * float(np.abs(Qn).sum(axis=1).max())
    lam_min = float(eig[0])
    if lam_min <= 0:
        return floor
    return max(tol * lam_min / math.sqrt(len(eig)), floor)


def solve_gradient_descent(system, cfg=None, alpha0=None):
    """alpha_k = alpha_{k-1} + mu (c - Q alpha_{k-1}), starting from all ones.

    Returns ``(alpha, report)``.  Raises :class:`DivergenceError` when the
    residual grows tenfold, which happens once mu >= 2 / lambda_max.
    """
    cfg = cfg or SolverConfig(method="gradient-descent")
    K = system.Q.shape[0]
    Qn = system.Q / system.N
    cn = system.c / system.N
    s = _gd_scale(Qn, cfg.mu, cfg.normalization)
    Qn, cn = np.ascontiguousarray(Qn / s), np.ascontiguousarray(cn / s)
    eig = np.linalg.eigvalsh(Qn)
    lam_max = float(eig[-1])
    threshold = _residual_threshold(cfg.tol, eig, Qn)
    start = np.ones(K) if alpha0 is None else np.asarray(alpha0, dtype=np.float64)
    alpha, its, r0, r, diverged = kernels.gradient_descent(
        Qn, cn, np.ascontiguousarray(start), cfg.mu, cfg.max_iters, threshold, DIVERGENCE_FACTOR
    )
    if diverged:
        raise DivergenceError(cfg.mu, lam_max, r0, r)
    report = SolverReport(
        method="gradient-descent",
        iterations=int(its),
        initial_residual=float(r0),
        final_residual=float(r),
        converged=bool(r <= threshold),
        scale=s,
        lambda_max=lam_max,
        condition=float(eig[-1] / eig[0]) if eig[0] > 0 else float("inf"),
    )
    return np.asarray(alpha), report


def solve(system, cfg):
    """Closed form or gradient descent per ``cfg``, with the degenerate-case policy.

    A noise-free system (sigma^2 = 0) is solved by gradient descent from all
    ones, which stays at ones up to Q's null space, and ``rank_deficient``
    records whether Q was near-singular.  With noise present a near-singular
    Q makes the closed form raise :class:`IllConditionedError`.
    """
    cond = float(np.linalg.cond(system.Q))
    singular = not np.isfinite(cond) or cond > CONDITION_LIMIT
    if cfg.method == "gradient-descent" or system.sigma2 == 0:
        gd_cfg = cfg if cfg.method == "gradient-descent" else SolverConfig(
            method="gradient-descent", mu=cfg.mu, max_iters=cfg.max_iters, tol=cfg.tol,
            normalization=cfg.normalization)
        alpha, report = solve_gradient_descent(system, gd_cfg)
    else:
        alpha = solve_closed_form(system)
        r = system.c - system.Q @ alpha
        report = SolverReport(method="closed-form", final_residual=float(np.abs(r).max()))
    report.condition = cond
    report.rank_deficient = singular
    return alpha, report


def denoise(y, sigma, cfg=None, realization="UWT-2D", synthesis="RUWT-2D", levels=5):
    """Denoise ``y`` corrupted by white noise of standard deviation ``sigma``.

    Returns ``(x_hat, diagnostics)``; ``x_hat`` is real-valued.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    cfg = cfg or SolverConfig()
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2:
        raise ValueError("denoise expects a single 2-D image")
    psis = uwt.recompose(uwt.decompose(y, levels, realization), synthesis)
    return denoise_from_psis(psis, y, sigma, cfg, levels, realization, synthesis)


def denoise_from_psis(psis, y, sigma, cfg, levels, realization="UWT-2D", synthesis="RUWT-2D"):
    height, width = y.shape
    sigma2 = float(sigma) ** 2
    system = accumulate_gram(psis, y).with_noise(trace_terms(levels, width, height, sigma2), sigma2)
    alpha, report = solve(system, cfg)
    x_hat = uwt.shrink_and_combine(psis, alpha)
    diag = Diagnostics(alpha, system.risk(alpha), report, levels, realization, synthesis)
    return x_hat, diag
