"""Network-path benchmark evaluation (no LUT quantization).

Scores the continuous networks on a directory of HR images with the same
protocol the engine's bench uses: bicubic degradation, adaptive upsampling,
shaved Y-PSNR. Used for the network-vs-LUT acceleration gap.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import torch

from .degrade import bt601_luma, degrade, modcrop, psnr_y
from .model import EnhancerNet, HyperNet
from .resampler import resample_scale
from PIL import Image


def eval_dataset_network(f_net: HyperNet, dataset_dir, scale: int,
                         g_net: EnhancerNet = None) -> float:
    """Mean Y-PSNR of the network path over the dataset at an integer scale."""
    paths = sorted(Path(dataset_dir).glob("*.png"))
    if not paths:
        raise ValueError(f"no images under {dataset_dir}")
    scores = []
    with torch.no_grad():
        for p in paths:
            rgb = np.asarray(Image.open(p).convert("RGB"), dtype=np.float64) / 255.0
            hr = modcrop(bt601_luma(rgb), scale)
            lr = degrade(hr, scale)
            lr_t = torch.from_numpy(lr.astype(np.float32))[None, None]
            pre = g_net(lr_t) if g_net is not None else lr_t
            theta = f_net(pre)
            out = resample_scale(pre, theta, hr.shape, f_net.family)
            sr = np.clip(out[0, 0].double().numpy(), 0.0, 1.0)
            scores.append(_psnr_plane(sr, hr, shave=scale))
    return float(np.mean(scores))


def _psnr_plane(a: np.ndarray, b: np.ndarray, shave: int) -> float:
    a = a[shave:-shave, shave:-shave]
    b = b[shave:-shave, shave:-shave]
    mse = float(np.mean((a - b) ** 2))
    if mse <= 0:
        return 100.0
    return min(10 * math.log10(1.0 / mse), 100.0)
