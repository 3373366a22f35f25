"""Bicubic proxy-pair degradation and luma/PSNR evaluation helpers.

Standard MATLAB-convention cubic resize (Keys a=-0.5, antialiased for
downscale, pixel-center geometry, replicate boundary), plus the BT.601
limited-range luma and shaved Y-PSNR used to score benchmark images.
"""
from __future__ import annotations

import math

import numpy as np


def _cubic(x, a=-0.5):
    x = np.abs(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x)
    m1 = x <= 1
    m2 = (x > 1) & (x < 2)
    out[m1] = (a + 2) * x[m1] ** 3 - (a + 3) * x[m1] ** 2 + 1
    out[m2] = a * x[m2] ** 3 - 5 * a * x[m2] ** 2 + 8 * a * x[m2] - 4 * a
    return out


def _axis_resize(arr, out_len, axis):
    in_len = arr.shape[axis]
    scale = out_len / in_len
    u = (np.arange(out_len) + 0.5) / scale - 0.5
    kw = 4.0 / scale if scale < 1 else 4.0
    ks = scale if scale < 1 else 1.0
    ntaps = int(math.ceil(kw)) + 2
    left = np.floor(u - kw / 2).astype(np.int64) + 1
    idx = left[:, None] + np.arange(ntaps)[None, :]
    w = _cubic((u[:, None] - idx) * ks)
    w /= w.sum(axis=1, keepdims=True)
    idx = np.clip(idx, 0, in_len - 1)
    moved = np.moveaxis(arr, axis, 0)
    out = np.zeros((out_len,) + moved.shape[1:], dtype=np.float64)
    for j in range(ntaps):
        out += w[:, j].reshape((-1,) + (1,) * (moved.ndim - 1)) * moved[idx[:, j]]
    return np.moveaxis(out, 0, axis)


def resize_cubic(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    out = _axis_resize(img, out_h, 0)
    out = _axis_resize(out, out_w, 1)
    return out


def degrade(img: np.ndarray, scale: float) -> np.ndarray:
    """Downscale by an integer-or-rational factor > 1 (e.g. 2 means half size)."""
    h = int(math.floor(img.shape[0] / scale))
    w = int(math.floor(img.shape[1] / scale))
    return np.clip(resize_cubic(img, h, w), 0.0, 1.0)


def bt601_luma(rgb: np.ndarray) -> np.ndarray:
    if rgb.ndim == 2 or rgb.shape[-1] == 1:
        return rgb.reshape(rgb.shape[0], rgb.shape[1])
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    return (16.0 + 65.481 * r + 128.553 * g + 24.966 * b) / 255.0


def psnr_y(a: np.ndarray, b: np.ndarray, shave: int) -> float:
    ya = bt601_luma(a)[shave:-shave, shave:-shave]
    yb = bt601_luma(b)[shave:-shave, shave:-shave]
    mse = float(np.mean((ya - yb) ** 2))
    if mse <= 0:
        return 100.0
    return min(10 * math.log10(1.0 / mse), 100.0)


def modcrop(img: np.ndarray, s: int) -> np.ndarray:
    h = img.shape[0] - img.shape[0] % s
    w = img.shape[1] - img.shape[1] % s
    return img[:h, :w]
