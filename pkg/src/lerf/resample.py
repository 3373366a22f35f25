"""Resampling engine: fixed-kernel baselines and the adaptive 2x2 path.

The adaptive path predicts hyper-parameters once on the (pre-processed)
source grid and indexes them by support-pixel location for every target
pixel, which is what makes one bank reusable across arbitrary transforms.
Outputs are deterministic for a given input: the per-pixel summation order
is fixed by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, ParameterError, ShapeError
from .geometry import GeometricTransform, Scale, SampleGrid, build_sample_grid
from .image import ImageBuffer, gaussian_filter, load_image
from .kernels import (
    KernelFamily,
    clamp_hyperparams,
    eval_fixed_1d,
    support_taps,
    weights_amplified_linear,
    weights_aniso_gaussian,
)
from .lut import LutBank, apply_g_enhancer, predict_hyperparams

_TAPS_2X2 = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class PreprocessConfig:
    """Source pre-processing stage: identity, Gaussian anti-alias blur,
    LUT enhancer from the bank, or an externally prepared image file."""

    kind: str = "identity"
    sigma: object = None      # scalar or (sigma_y, sigma_x); antialias only
    path: object = None       # external only

    IDENTITY = "identity"
    ANTIALIAS = "antialias"
    LUT_ENHANCER = "lut_enhancer"
    EXTERNAL = "external"

    def __post_init__(self):
        if self.kind not in (self.IDENTITY, self.ANTIALIAS, self.LUT_ENHANCER, self.EXTERNAL):
            raise ConfigError(f"unknown preprocess kind {self.kind!r}")
        if self.kind == self.ANTIALIAS:
            sig = self.sigma if not np.isscalar(self.sigma) else (self.sigma, self.sigma)
            if sig is None or any(not (float(s) > 0) for s in sig):
                raise ConfigError(f"antialias sigma must be > 0, got {self.sigma}")
        if self.kind == self.EXTERNAL and not self.path:
            raise ConfigError("external preprocessing needs a file path")


def identity_preproc() -> PreprocessConfig:
    return PreprocessConfig(PreprocessConfig.IDENTITY)


def antialias_preproc(sigma) -> PreprocessConfig:
    return PreprocessConfig(PreprocessConfig.ANTIALIAS, sigma=sigma)


def enhancer_preproc() -> PreprocessConfig:
    return PreprocessConfig(PreprocessConfig.LUT_ENHANCER)


def external_preproc(path) -> PreprocessConfig:
    return PreprocessConfig(PreprocessConfig.EXTERNAL, path=path)


def aa_sigma_for_scale(r: float) -> float:
    """Anti-alias blur schedule: zero at r=1, growing as the factor shrinks."""
    if not 0 < r:
        raise ParameterError(f"scale factor must be > 0, got {r}")
    return max(0.5 / r - 0.5, 0.0)


@dataclass
class ResampleJob:
    source: ImageBuffer
    transform: GeometricTransform
    kernel: KernelFamily
    target_hw: tuple
    preproc: PreprocessConfig = field(default_factory=identity_preproc)
    bank: LutBank = None
    hyper_map: np.ndarray = None


@dataclass(frozen=True)
class ResampleResult:
    image: ImageBuffer
    valid: np.ndarray


def preprocess(img: ImageBuffer, cfg: PreprocessConfig, bank: LutBank = None) -> ImageBuffer:
    if cfg.kind == PreprocessConfig.IDENTITY:
        return img
    if cfg.kind == PreprocessConfig.ANTIALIAS:
        return gaussian_filter(img, cfg.sigma)
    if cfg.kind == PreprocessConfig.LUT_ENHANCER:
        if bank is None or not bank.has_enhancer:
            raise ConfigError("LUT enhancer preprocessing needs a bank with g-tables")
        return apply_g_enhancer(img, bank)
    ext = load_image(cfg.path)
    if (ext.height, ext.width) != (img.height, img.width) or ext.channels != img.channels:
        raise ShapeError(
            f"external image {(ext.height, ext.width, ext.channels)} does not match "
            f"source {(img.height, img.width, img.channels)}"
        )
    return ext


def _check_dims(target_hw):
    th, tw = target_hw
    if th <= 0 or tw <= 0:
        raise ParameterError(f"target dims must be positive, got {target_hw}")
    return int(th), int(tw)


def resample_fixed(job: ResampleJob) -> ResampleResult:
    """Classic interpolation: separable fixed-family weights over the support."""
    if job.kernel.is_adaptive:
        raise ConfigError(f"resample_fixed needs a fixed family, got {job.kernel.kind}")
    th, tw = _check_dims(job.target_hw)
    src = preprocess(job.source, job.preproc, job.bank)
    grid = build_sample_grid(job.transform, (src.height, src.width), (th, tw))

    taps = support_taps(job.kernel)
    wy = eval_fixed_1d(job.kernel, grid.frac_y[..., None] - taps)
    wx = eval_fixed_1d(job.kernel, grid.frac_x[..., None] - taps)
    norm = wy.sum(axis=-1) * wx.sum(axis=-1)

    data = src.data
    out = np.zeros((th, tw, src.channels), dtype=np.float64)
    for i, dy in enumerate(taps):
        yy = np.clip(grid.base_y + dy, 0, src.height - 1)
        w_row = wy[..., i]
        if not np.any(w_row):
            continue
        for j, dx in enumerate(taps):
            xx = np.clip(grid.base_x + dx, 0, src.width - 1)
            w = w_row * wx[..., j]
            out += w[..., None] * data[yy, xx]
    out /= norm[..., None]
    out[~grid.valid] = 0.0
    return ResampleResult(ImageBuffer(out, colorspace=src.colorspace), grid.valid)


def _hyper_map_for(job: ResampleJob, pre: ImageBuffer) -> np.ndarray:
    c = job.kernel.hyper_channels
    if job.hyper_map is not None:
        hm = np.asarray(job.hyper_map, dtype=np.float64)
        if hm.shape != (pre.height, pre.width, c):
            raise ShapeError(
                f"hyper map shape {hm.shape} does not match source "
                f"{(pre.height, pre.width, c)}"
            )
        return clamp_hyperparams(hm, job.kernel)
    if job.bank is None:
        raise ConfigError(f"{job.kernel.kind} needs a LUT bank or an explicit hyper map")
    if job.bank.family.kind != job.kernel.kind:
        raise ConfigError(
            f"bank family {job.bank.family.kind} does not match kernel {job.kernel.kind}"
        )
    return predict_hyperparams(pre, job.bank)


def resample_lerf(job: ResampleJob) -> ResampleResult:
    """Adaptive 2x2 resampling with per-source-pixel hyper-parameters."""
    if not job.kernel.is_adaptive:
        raise ConfigError(f"resample_lerf needs an adaptive family, got {job.kernel.kind}")
    th, tw = _check_dims(job.target_hw)
    pre = preprocess(job.source, job.preproc, job.bank)
    hyper = _hyper_map_for(job, pre)
    grid = build_sample_grid(job.transform, (pre.height, pre.width), (th, tw))

    gathered = []
    for dy, dx in _TAPS_2X2:
        yy = np.clip(grid.base_y + dy, 0, pre.height - 1)
        xx = np.clip(grid.base_x + dx, 0, pre.width - 1)
        # (u, v) = signed (x, y) offset from the support pixel to the target
        u = grid.frac_x - dx
        v = grid.frac_y - dy
        gathered.append((yy, xx, u, v))

    u = np.stack([g[2] for g in gathered], axis=-1)
    v = np.stack([g[3] for g in gathered], axis=-1)
    theta = np.stack([hyper[g[0], g[1], :] for g in gathered], axis=-2)  # (H,W,4,C)

    if job.kernel.kind == kernels.AMPLIFIED_LINEAR:
        w = weights_amplified_linear(theta[..., 0], u, v)
    else:
        w = weights_aniso_gaussian(theta[..., 0], theta[..., 1], theta[..., 2], u, v)

    out = np.zeros((th, tw, pre.channels), dtype=np.float64)
    for k, (yy, xx, _, _) in enumerate(gathered):
        out += w[..., k, None] * pre.data[yy, xx]
    out[~grid.valid] = 0.0
    return ResampleResult(ImageBuffer(out, colorspace=pre.colorspace), grid.valid)


def resample(job: ResampleJob) -> ResampleResult:
    """Dispatch on the job's kernel family."""
    if job.kernel.is_adaptive:
        return resample_lerf(job)
    return resample_fixed(job)


def downsample_lerf(job: ResampleJob) -> ResampleResult:
    """Adaptive downsampling behind the anti-alias pre-filter.

    Requires a Scale transform with both factors < 1; when the job carries a
    plain identity preprocess the AA sigma schedule is applied per axis.
    """
    if not isinstance(job.transform, Scale):
        raise ConfigError("downsample_lerf needs a Scale transform")
    if not (job.transform.r_h < 1 and job.transform.r_w < 1):
        raise ParameterError(
            f"downsample factors must be < 1, got {job.transform.r_h}, {job.transform.r_w}"
        )
    cfg = job.preproc
    if cfg.kind == PreprocessConfig.IDENTITY:
        cfg = antialias_preproc(
            (aa_sigma_for_scale(job.transform.r_h), aa_sigma_for_scale(job.transform.r_w))
        )
    job = ResampleJob(job.source, job.transform, job.kernel, job.target_hw,
                      cfg, job.bank, job.hyper_map)
    return resample_lerf(job)
