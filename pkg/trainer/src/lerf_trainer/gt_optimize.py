"""Per-image ground-truth optimization of the hyper-parameter map.

Gradient-descends a raw parameter field through the same bounded activations
the networks use (so the result always satisfies the engine's clamps),
minimizing the MSE between the adaptively upsampled LR image and the HR
reference. Serves as the oracle for what the resampling functions can do on
a given image, independent of any learned predictor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .bankio import FAMILY_GAUSSIAN
from .resampler import resample_scale, scale_grid


class OptimizationError(RuntimeError):
    pass


@dataclass
class GtOptResult:
    theta: np.ndarray        # (h, w, 3) rho, inv_sigma_x, inv_sigma_y
    initial_loss: float
    final_loss: float


def _activate(raw: torch.Tensor) -> torch.Tensor:
    rho = 0.95 * torch.tanh(raw[0:1])
    sig = 4.0 * torch.sigmoid(raw[1:3])
    return torch.cat([rho, sig], dim=0)


def gt_optimize(lr_plane: np.ndarray, hr_plane: np.ndarray, scale,
                iters: int = 300, step: float = 0.05) -> GtOptResult:
    """Optimize an anisotropic-Gaussian map for one luma image pair.

    scale is the upsampling factor (scalar or (r_h, r_w)); the initial map is
    the frozen isotropic kernel rho=0, inv_sigma=1.
    """
    if np.isscalar(scale):
        scale = (float(scale), float(scale))
    h, w = lr_plane.shape
    th, tw = hr_plane.shape
    if not (abs(h * scale[0] - th) < 1 and abs(w * scale[1] - tw) < 1):
        raise OptimizationError(
            f"dims inconsistent: {lr_plane.shape} x {scale} vs {hr_plane.shape}"
        )
    lr_t = torch.from_numpy(lr_plane.astype(np.float64))[None, None]
    hr_t = torch.from_numpy(hr_plane.astype(np.float64))[None, None]
    grid = scale_grid((h, w), (th, tw), dtype=torch.float64)

    # raw init: tanh^-1(0) = 0 for rho; sigmoid(x) = 1/4 -> inv_sigma 1
    raw = torch.zeros((3, h, w), dtype=torch.float64, requires_grad=True)
    with torch.no_grad():
        raw[1:3] = np.log(1.0 / 3.0)
    opt = torch.optim.Adam([raw], lr=step)

    initial = None
    loss = None
    for it in range(iters):
        theta = _activate(raw)[None]
        out = resample_scale(lr_t, theta, (th, tw), FAMILY_GAUSSIAN, grid=grid)
        loss = torch.mean((out - hr_t) ** 2)
        if not torch.isfinite(loss):
            raise OptimizationError(f"non-finite loss at iteration {it}")
        if initial is None:
            initial = loss.item()
        opt.zero_grad()
        loss.backward()
        opt.step()
    with torch.no_grad():
        theta = _activate(raw).permute(1, 2, 0).numpy()
        out = resample_scale(lr_t, _activate(raw)[None], (th, tw), FAMILY_GAUSSIAN, grid=grid)
        final = float(torch.mean((out - hr_t) ** 2))
    return GtOptResult(theta, initial, final)
