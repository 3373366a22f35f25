"""Network vs LUT-retrieval parity: the cost of quantized acceleration."""
from __future__ import annotations

import argparse
import sys

import numpy as np
import torch

from .bankio import read_bank
from .mirror import predict_from_bank
from .train import load_checkpoint


def parity_stats(f_net, bank, n_pixels: int = 10_000, seed: int = 0):
    """Mean/max absolute hyper-parameter deviation on random 8-bit inputs.

    Evaluates the continuous network and the quantized tables on the same
    random byte image with one pixel per requested patch.
    """
    rng = np.random.default_rng(seed)
    side = int(np.ceil(np.sqrt(n_pixels)))
    plane = rng.integers(0, 256, (side, side)).astype(np.float64) / 255.0
    lut_theta = predict_from_bank(bank, plane)
    with torch.no_grad():
        net_theta = f_net(torch.from_numpy(plane.astype(np.float32))[None, None])
    net_theta = net_theta[0].permute(1, 2, 0).double().numpy()
    diff = np.abs(lut_theta - net_theta).reshape(-1, lut_theta.shape[-1])[:n_pixels]
    return diff.mean(axis=0), diff.max(axis=0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bank", required=True)
    ap.add_argument("--ckpt", required=True)
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    f_net, _, _, _ = load_checkpoint(args.ckpt)
    bank = read_bank(args.bank)
    mean_dev, max_dev = parity_stats(f_net, bank, args.n, args.seed)
    for c, (m, mx) in enumerate(zip(mean_dev, max_dev)):
        print(f"channel {c}: mean abs dev {m:.5f}  max abs dev {mx:.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
