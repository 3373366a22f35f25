import numpy as np
import pytest
import torch

from lerf_trainer.bankio import FAMILY_GAUSSIAN, FAMILY_LINEAR
from lerf_trainer.model import Branch, EnhancerNet, HyperNet


def test_init_predicts_frozen_isotropic():
    torch.manual_seed(0)
    net = HyperNet(FAMILY_GAUSSIAN, hidden=8, depth=3)
    theta = net(torch.rand(1, 1, 9, 9))
    np.testing.assert_allclose(theta[:, 0].detach(), 0.0, atol=1e-7)
    np.testing.assert_allclose(theta[:, 1:].detach(), 1.0, atol=1e-6)


def test_outputs_always_in_bounds(small_net):
    with torch.no_grad():
        theta = small_net(torch.rand(2, 1, 14, 10))
    assert float(theta[:, 0].abs().max()) <= 0.95
    assert float(theta[:, 1:].min()) > 0
    assert float(theta[:, 1:].max()) <= 4.0


def test_alpha_family_bounds():
    torch.manual_seed(3)
    net = HyperNet(FAMILY_LINEAR, hidden=8, depth=3)
    with torch.no_grad():
        for b in net.branches.values():
            b.net[-1].weight.normal_(0, 0.5)
            b.net[-1].bias.normal_(0, 0.5)
    with torch.no_grad():
        theta = net(torch.rand(1, 1, 8, 8))
    assert theta.shape[1] == 1
    assert float(theta.min()) > 0 and float(theta.max()) <= 2.0


def test_ensemble_equivariant_under_180(small_net):
    x = torch.rand(1, 1, 13, 17)
    theta = small_net(x)
    theta_rot = small_net(torch.rot90(x, 2, dims=(-2, -1)))
    np.testing.assert_allclose(
        theta_rot.detach().numpy(),
        torch.rot90(theta, 2, dims=(-2, -1)).detach().numpy(),
        atol=1e-6,
    )


def test_branch_gather_replicates_border():
    b = Branch("C", "gauss", hidden=4, depth=2)
    plane = torch.arange(12, dtype=torch.float32).reshape(1, 1, 3, 4) / 12
    g = b.gather(plane)
    assert g.shape == (1, 4, 3, 4)
    # tap 3 of pattern C reads (0, +3): at column W-1 it must replicate col W-1
    assert g[0, 3, 0, 3] == plane[0, 0, 0, 3]
    assert g[0, 1, 0, 3] == plane[0, 0, 0, 3]


def test_enhancer_starts_as_identity():
    torch.manual_seed(0)
    g = EnhancerNet(hidden=8, depth=3)
    x = torch.rand(1, 1, 10, 10)
    np.testing.assert_allclose(g(x).detach(), x, atol=1e-7)


def test_forward_tuples_matches_plane_forward(small_net):
    # a constant plane makes every pattern see one tuple of equal pixels
    val = 0.3137254901960784  # 80/255
    plane = torch.full((1, 1, 6, 6), val)
    b = small_net.branches["S_deg0_180"]
    by_plane = b(plane)[0, :, 3, 3]
    by_tuple = b.forward_tuples(torch.full((1, 4), val))[0]
    np.testing.assert_allclose(by_plane.detach(), by_tuple.detach(), atol=1e-7)
