"""End-to-end training of the hyper-parameter predictor (and optional enhancer).

Proxy task: fixed-scale upsampling of bicubic-degraded luma crops under MSE.
The forward pass is the differentiable twin of the engine's inference:
enhance (optional) -> predict hyper-parameters with the directional ensemble
-> adaptive 2x2 aggregation on the scale grid.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .bankio import FAMILY_GAUSSIAN, FAMILY_LINEAR
from .data import CropSampler
from .export import export_bank
from .model import EnhancerNet, HyperNet
from .resampler import resample_scale, scale_grid


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    family: int = FAMILY_GAUSSIAN
    scale: int = 4
    iters: int = 2000
    batch: int = 32
    crop: int = 48
    lr: float = 1e-3
    lr_min: float = 1e-5
    seed: int = 0
    hidden: int = 64
    depth: int = 4
    train_g: bool = False
    log_every: int = 100


@dataclass
class TrainResult:
    f_net: HyperNet
    g_net: EnhancerNet | None
    losses: list = field(default_factory=list)


def cosine_lr(step: int, cfg: TrainConfig) -> float:
    t = step / max(cfg.iters - 1, 1)
    return cfg.lr_min + 0.5 * (cfg.lr - cfg.lr_min) * (1 + math.cos(math.pi * t))


def forward_batch(f_net, g_net, lr_t, tgt_hw, grid, family):
    pre = g_net(lr_t) if g_net is not None else lr_t
    theta = f_net(pre)
    return resample_scale(pre, theta, tgt_hw, family, grid=grid)


def train(cfg: TrainConfig, data_dir) -> TrainResult:
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    sampler = CropSampler(data_dir, cfg.scale, cfg.crop, rng)

    f_net = HyperNet(cfg.family, cfg.hidden, cfg.depth)
    g_net = EnhancerNet(cfg.hidden, cfg.depth) if cfg.train_g else None
    params = list(f_net.parameters())
    if g_net is not None:
        params += list(g_net.parameters())
    opt = torch.optim.Adam(params, lr=cfg.lr)

    crop = sampler.crop
    tgt_hw = (crop, crop)
    src_hw = (crop // cfg.scale, crop // cfg.scale)
    grid = scale_grid(src_hw, tgt_hw)

    losses = []
    for step in range(cfg.iters):
        for group in opt.param_groups:
            group["lr"] = cosine_lr(step, cfg)
        lr_np, hr_np = sampler.batch(cfg.batch)
        lr_t = torch.from_numpy(lr_np)
        hr_t = torch.from_numpy(hr_np)
        out = forward_batch(f_net, g_net, lr_t, tgt_hw, grid, cfg.family)
        loss = torch.mean((out - hr_t) ** 2)
        if not torch.isfinite(loss):
            raise TrainingError(f"non-finite loss at iteration {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(loss.item())
        if cfg.log_every and step % cfg.log_every == 0:
            print(f"iter {step:5d}  lr {cosine_lr(step, cfg):.2e}  mse {losses[-1]:.6f}")
    return TrainResult(f_net, g_net, losses)


def save_checkpoint(result: TrainResult, cfg: TrainConfig, path) -> None:
    torch.save({
        "config": vars(cfg),
        "f_state": result.f_net.state_dict(),
        "g_state": result.g_net.state_dict() if result.g_net else None,
        "losses": result.losses,
    }, path)


def load_checkpoint(path):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    cfg = TrainConfig(**blob["config"])
    f_net = HyperNet(cfg.family, cfg.hidden, cfg.depth)
    f_net.load_state_dict(blob["f_state"])
    f_net.eval()
    g_net = None
    if blob.get("g_state") is not None:
        g_net = EnhancerNet(cfg.hidden, cfg.depth)
        g_net.load_state_dict(blob["g_state"])
        g_net.eval()
    return f_net, g_net, cfg, blob.get("losses", [])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", required=True, help="directory of HR crop PNGs")
    ap.add_argument("--scale", type=int, default=4)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--crop", type=int, default=48)
    ap.add_argument("--out", required=True, help="output bank file")
    ap.add_argument("--family", choices=["linear", "gaussian"], default="gaussian")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--train-g", action="store_true", help="jointly train the enhancer")
    ap.add_argument("--ckpt", default=None, help="also save a checkpoint here")
    args = ap.parse_args(argv)

    cfg = TrainConfig(
        family=FAMILY_GAUSSIAN if args.family == "gaussian" else FAMILY_LINEAR,
        scale=args.scale, iters=args.iters, batch=args.batch, crop=args.crop,
        seed=args.seed, train_g=args.train_g,
    )
    if len(list(Path(args.data).glob("*.png"))) == 0:
        print(f"error: no training crops under {args.data}", file=sys.stderr)
        return 2
    result = train(cfg, args.data)
    export_bank(result.f_net, args.out, g_net=result.g_net)
    print(f"wrote {args.out}  (final mse {result.losses[-1]:.6f})")
    if args.ckpt:
        save_checkpoint(result, cfg, args.ckpt)
        print(f"wrote {args.ckpt}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
