from pathlib import Path

import numpy as np
import pytest
import torch

TRAINER_ROOT = Path(__file__).resolve().parent.parent
CROPS_DIR = TRAINER_ROOT / "data" / "crops"
PRIMARY_ROOT = TRAINER_ROOT.parent
SET5_DIR = PRIMARY_ROOT / "tests" / "data" / "Set5"


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def small_net():
    from lerf_trainer.bankio import FAMILY_GAUSSIAN
    from lerf_trainer.model import HyperNet

    torch.manual_seed(11)
    net = HyperNet(FAMILY_GAUSSIAN, hidden=16, depth=3)
    with torch.no_grad():
        for b in net.branches.values():
            b.net[-1].weight.normal_(0, 0.4)
            b.net[-1].bias.normal_(0, 0.3)
    net.eval()
    return net


def edge_pair(direction: str, size: int = 32, scale: int = 2):
    """Synthetic soft diagonal edge (luma HR plane) and its bicubic LR."""
    from lerf_trainer.degrade import degrade

    y, x = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    if direction == "main":        # edge along y = x
        d = (x - y) / 3.0
    else:                          # edge along y = -x
        d = (x + y - (size - 1)) / 3.0
    hr = 1.0 / (1.0 + np.exp(-d))
    lr = degrade(hr, scale)
    return lr, hr
