"""Quality metrics and the bicubic degradation used to synthesize LR inputs.

PSNR/SSIM operate in the canonical [0, 1] domain on the BT.601 luma plane;
mPSNR pools squared error across color channels inside a validity mask.
Zero-error pairs report the 100 dB cap instead of infinity.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from .errors import EvaluationError, ParameterError, ShapeError
from .image import ImageBuffer, luma_plane
from .kernels import keys_cubic_1d

PSNR_CAP = 100.0

_SSIM_WIN = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def _resize_axis_cubic(arr: np.ndarray, out_len: int, axis: int, a: float = -0.5) -> np.ndarray:
    """One axis of a MATLAB-style cubic resize with replicate boundary.

    For downscaling the kernel is stretched by the inverse factor and
    renormalized (anti-aliased); at scale 1 this is an exact identity.
    """
    in_len = arr.shape[axis]
    scale = out_len / in_len
    u = (np.arange(out_len) + 0.5) / scale - 0.5
    if scale < 1.0:
        kwidth = 4.0 / scale
        kscale = scale
    else:
        kwidth = 4.0
        kscale = 1.0
    ntaps = int(math.ceil(kwidth)) + 2
    left = np.floor(u - kwidth / 2).astype(np.int64) + 1
    idx = left[:, None] + np.arange(ntaps)[None, :]
    w = keys_cubic_1d((u[:, None] - idx) * kscale, a)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, in_len - 1)

    moved = np.moveaxis(arr, axis, 0)
    out = np.zeros((out_len,) + moved.shape[1:], dtype=np.float64)
    for j in range(ntaps):
        out += w[:, j].reshape((-1,) + (1,) * (moved.ndim - 1)) * moved[idx[:, j]]
    return np.moveaxis(out, 0, axis)


def degrade_bicubic(hr: ImageBuffer, r_h: float, r_w: float) -> ImageBuffer:
    """Bicubic degradation (Keys a=-0.5, antialiased) to floor(dim * r)."""
    if not (0 < r_h <= 1 and 0 < r_w <= 1):
        raise ParameterError(f"degradation factors must be in (0, 1], got {r_h}, {r_w}")
    out_h = int(math.floor(hr.height * r_h))
    out_w = int(math.floor(hr.width * r_w))
    if out_h < 1 or out_w < 1:
        raise ParameterError(f"degraded dims collapse to {out_h}x{out_w}")
    out = _resize_axis_cubic(hr.data, out_h, 0)
    out = _resize_axis_cubic(out, out_w, 1)
    return ImageBuffer(np.clip(out, 0.0, 1.0), colorspace=hr.colorspace)


def _check_same_shape(a: ImageBuffer, b: ImageBuffer):
    if (a.height, a.width) != (b.height, b.width):
        raise ShapeError(f"image dims differ: {(a.height, a.width)} vs {(b.height, b.width)}")


def _shaved_luma(a: ImageBuffer, b: ImageBuffer, shave: int):
    ya, yb = luma_plane(a), luma_plane(b)
    if shave > 0:
        if 2 * shave >= min(ya.shape):
            raise EvaluationError(f"shave={shave} leaves no pixels on {ya.shape}")
        ya = ya[shave:-shave, shave:-shave]
        yb = yb[shave:-shave, shave:-shave]
    return ya, yb


def _mse_to_db(mse: float) -> float:
    if mse <= 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP)


def psnr_y(a: ImageBuffer, b: ImageBuffer, shave: int = 0) -> float:
    """Luma PSNR in dB after cropping `shave` pixels from every border."""
    _check_same_shape(a, b)
    ya, yb = _shaved_luma(a, b, shave)
    return _mse_to_db(float(np.mean((ya - yb) ** 2)))


def mpsnr(a: ImageBuffer, b: ImageBuffer, mask: np.ndarray) -> float:
    """PSNR with squared error pooled across channels inside the mask."""
    _check_same_shape(a, b)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (a.height, a.width):
        raise ShapeError(f"mask shape {mask.shape} vs image {(a.height, a.width)}")
    if not mask.any():
        raise EvaluationError("mPSNR over an empty mask")
    diff = (a.data - b.data)[mask]
    return _mse_to_db(float(np.mean(diff**2)))


def _ssim_window() -> np.ndarray:
    half = (_SSIM_WIN - 1) // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / _SSIM_SIGMA) ** 2)
    return k / k.sum()


def _win_filter(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    half = (_SSIM_WIN - 1) // 2
    out = correlate1d(img, k, axis=0, mode="nearest")
    out = correlate1d(out, k, axis=1, mode="nearest")
    return out[half:-half, half:-half]  # keep only fully interior windows


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Single-scale SSIM, 11x11 Gaussian window sigma=1.5, range 1.0,
    averaged over fully valid window positions."""
    _check_same_shape(a, b)
    ya, yb = luma_plane(a), luma_plane(b)
    if min(ya.shape) < _SSIM_WIN:
        raise EvaluationError(f"image {ya.shape} smaller than the {_SSIM_WIN}x{_SSIM_WIN} window")
    k = _ssim_window()
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    mu_a = _win_filter(ya, k)
    mu_b = _win_filter(yb, k)
    var_a = _win_filter(ya * ya, k) - mu_a**2
    var_b = _win_filter(yb * yb, k) - mu_b**2
    cov = _win_filter(ya * yb, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
