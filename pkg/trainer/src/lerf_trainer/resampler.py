"""Differentiable 2x2 adaptive resampling for scale transforms."""
from __future__ import annotations

import torch

from .bankio import FAMILY_GAUSSIAN, FAMILY_LINEAR

TAPS = ((0, 0), (0, 1), (1, 0), (1, 1))


def scale_grid(src_hw, tgt_hw, device=None, dtype=torch.float32):
    """Per-target anchor indices and (u, v) = (x, y) offsets for the 4 taps.

    Returns (yy, xx, u, v): LongTensors (4, H, W) of clamped source indices
    and float tensors (4, H, W) of signed offsets from tap to target.
    """
    sh, sw = src_hw
    th, tw = tgt_hw
    r_h = th / sh
    r_w = tw / sw
    ty = torch.arange(th, dtype=torch.float64, device=device)
    tx = torch.arange(tw, dtype=torch.float64, device=device)
    sy = ((ty + 0.5) / r_h - 0.5)[:, None].expand(th, tw)
    sx = ((tx + 0.5) / r_w - 0.5)[None, :].expand(th, tw)
    by = torch.floor(sy)
    bx = torch.floor(sx)
    fy = (sy - by).to(dtype)
    fx = (sx - bx).to(dtype)
    yy, xx, uu, vv = [], [], [], []
    for dy, dx in TAPS:
        yy.append((by.long() + dy).clamp(0, sh - 1))
        xx.append((bx.long() + dx).clamp(0, sw - 1))
        uu.append(fx - dx)
        vv.append(fy - dy)
    return torch.stack(yy), torch.stack(xx), torch.stack(uu), torch.stack(vv)


def adaptive_weights(theta_taps: torch.Tensor, u: torch.Tensor, v: torch.Tensor,
                     family: int) -> torch.Tensor:
    """theta_taps (4, C, ...), u/v (4, ...) -> normalized weights (4, ...)."""
    if family == FAMILY_GAUSSIAN:
        rho = theta_taps[:, 0]
        isx = theta_taps[:, 1]
        isy = theta_taps[:, 2]
        q = (u * u * isx**2 - 2 * rho * isx * isy * u * v + v * v * isy**2)
        q = q / (1 - rho * rho)
        raw = torch.exp(-0.5 * q)
    else:
        alpha = theta_taps[:, 0]
        raw = torch.clamp(1 - alpha * u.abs(), min=0) * torch.clamp(1 - alpha * v.abs(), min=0)
    total = raw.sum(dim=0, keepdim=True)
    # degenerate all-zero stacks only arise for the hat family at extreme
    # alpha; fall back to the first tap to keep the graph finite
    safe = torch.where(total > 0, total, torch.ones_like(total))
    w = raw / safe
    if family == FAMILY_LINEAR:
        dead = (total <= 0).expand_as(w)
        first = torch.zeros_like(w)
        first[0] = 1.0
        w = torch.where(dead, first, w)
    return w


def resample_scale(img: torch.Tensor, theta: torch.Tensor, tgt_hw, family: int,
                   grid=None) -> torch.Tensor:
    """Adaptive upsampling of (B, C, h, w) images to tgt_hw.

    theta is the per-source-pixel hyper-parameter map (B, C_h, h, w); the
    hyper-parameters are indexed by support-pixel location, so one map serves
    every target position touching that pixel.
    """
    b, c, sh, sw = img.shape
    if grid is None:
        grid = scale_grid((sh, sw), tgt_hw, device=img.device, dtype=img.dtype)
    yy, xx, u, v = grid
    theta_taps = theta[:, :, yy, xx].permute(2, 1, 0, 3, 4)  # (4, C_h, B, H, W)
    w = adaptive_weights(theta_taps, u[:, None], v[:, None], family)  # (4, B, H, W)
    taps = img[:, :, yy, xx].permute(2, 0, 1, 3, 4)  # (4, B, C, H, W)
    return (w[:, :, None] * taps).sum(dim=0)
