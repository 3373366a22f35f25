"""Multi-branch hyper-parameter networks with bounded heads.

One branch per (indexing pattern, rotation role); each branch maps the 4
pattern pixels to its outputs through a pattern-shaped input layer followed
by pointwise layers. Head activations keep every output inside the engine's
hyper-parameter clamps by construction, so exported tables decode within
bounds. The directional-ensemble forward mirrors the engine's retrieval
rule: deg0_180 branches run on the 0/180-degree image rotations, deg90_270
branches on 90/270 with the quarter-turn remap (swap inverse sigmas, negate
the correlation) applied to their predictions.
"""
from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .bankio import FAMILY_GAUSSIAN, FAMILY_LINEAR, PATTERN_OFFSETS, PATTERNS, ROLES

# torch.rot90(k) rotations covered by each role; the engine averages the same
# rotation sets per table (image-rotation k here equals offset-rotation 4-k
# there, so the pairs {0,2} and {1,3} coincide).
ROLE_ROTATIONS = {"deg0_180": (0, 2), "deg90_270": (1, 3)}

HEAD_GAUSS = "gauss"
HEAD_ALPHA = "alpha"
HEAD_RESIDUAL = "residual"

_HEAD_CHANNELS = {HEAD_GAUSS: 3, HEAD_ALPHA: 1, HEAD_RESIDUAL: 1}


class Branch(nn.Module):
    """4-pixel pattern -> bounded outputs, as pointwise convolutions."""

    def __init__(self, pattern: str, head: str, hidden: int = 64, depth: int = 4):
        super().__init__()
        self.pattern = pattern
        self.head = head
        self.offsets = PATTERN_OFFSETS[pattern]
        c_out = _HEAD_CHANNELS[head]
        layers = [nn.Conv2d(4, hidden, 1), nn.ReLU(inplace=True)]
        for _ in range(depth - 2):
            layers += [nn.Conv2d(hidden, hidden, 1), nn.ReLU(inplace=True)]
        layers += [nn.Conv2d(hidden, c_out, 1)]
        self.net = nn.Sequential(*layers)
        self._init_head()

    def _init_head(self):
        final = self.net[-1]
        nn.init.zeros_(final.weight)
        nn.init.zeros_(final.bias)
        if self.head == HEAD_GAUSS:
            # start at rho=0, inv_sigma = 4*sigmoid(log(1/3)) = 1
            with torch.no_grad():
                final.bias[1] = -1.0986122886681098
                final.bias[2] = -1.0986122886681098

    def gather(self, plane: torch.Tensor) -> torch.Tensor:
        """(B, 1, H, W) -> (B, 4, H, W) pattern samples, replicate boundary."""
        reach = max(max(dy, dx) for dy, dx in self.offsets)
        padded = F.pad(plane, (0, reach, 0, reach), mode="replicate")
        h, w = plane.shape[-2:]
        taps = [padded[:, :, dy : dy + h, dx : dx + w] for dy, dx in self.offsets]
        return torch.cat(taps, dim=1)

    def activate(self, raw: torch.Tensor) -> torch.Tensor:
        if self.head == HEAD_GAUSS:
            rho = 0.95 * torch.tanh(raw[:, 0:1])
            sig = 4.0 * torch.sigmoid(raw[:, 1:3])
            return torch.cat([rho, sig], dim=1)
        if self.head == HEAD_ALPHA:
            return 2.0 * torch.sigmoid(raw)
        return 0.5 * torch.tanh(raw)

    def forward(self, plane: torch.Tensor) -> torch.Tensor:
        return self.activate(self.net(self.gather(plane)))

    def forward_tuples(self, quads: torch.Tensor) -> torch.Tensor:
        """(N, 4) pattern-pixel tuples -> (N, c_out); the export path."""
        x = quads.reshape(-1, 4, 1, 1)
        return self.activate(self.net(x)).reshape(quads.shape[0], -1)


def _remap_quarter(theta: torch.Tensor, family: int) -> torch.Tensor:
    if family == FAMILY_LINEAR:
        return theta
    return torch.cat([-theta[:, 0:1], theta[:, 2:3], theta[:, 1:2]], dim=1)


class HyperNet(nn.Module):
    """Six f-branches fused by the directional ensemble."""

    def __init__(self, family: int, hidden: int = 64, depth: int = 4):
        super().__init__()
        self.family = family
        head = HEAD_GAUSS if family == FAMILY_GAUSSIAN else HEAD_ALPHA
        self.branches = nn.ModuleDict({
            f"{pattern}_{role}": Branch(pattern, head, hidden, depth)
            for role in ROLES
            for pattern in PATTERNS
        })

    @property
    def c_out(self) -> int:
        return 3 if self.family == FAMILY_GAUSSIAN else 1

    def forward(self, plane: torch.Tensor) -> torch.Tensor:
        """(B, 1, H, W) luma -> (B, C, H, W) hyper-parameter map."""
        acc = None
        for role in ROLES:
            for pattern in PATTERNS:
                branch = self.branches[f"{pattern}_{role}"]
                pair = None
                for k in ROLE_ROTATIONS[role]:
                    x = torch.rot90(plane, k, dims=(-2, -1))
                    out = torch.rot90(branch(x), -k, dims=(-2, -1))
                    if k % 2 == 1:
                        out = _remap_quarter(out, self.family)
                    pair = out if pair is None else pair + out
                pair = pair * 0.5
                acc = pair if acc is None else acc + pair
        return acc / len(self.branches)


class EnhancerNet(nn.Module):
    """Three residual branches averaged over all four rotations."""

    def __init__(self, hidden: int = 64, depth: int = 4):
        super().__init__()
        self.branches = nn.ModuleDict({
            pattern: Branch(pattern, HEAD_RESIDUAL, hidden, depth) for pattern in PATTERNS
        })

    def forward(self, plane: torch.Tensor) -> torch.Tensor:
        """(B, 1, H, W) -> (B, 1, H, W) enhanced plane (input + mean residual)."""
        acc = None
        for pattern in PATTERNS:
            branch = self.branches[pattern]
            for k in range(4):
                x = torch.rot90(plane, k, dims=(-2, -1))
                out = torch.rot90(branch(x), -k, dims=(-2, -1))
                acc = out if acc is None else acc + out
        return plane + acc / (4 * len(self.branches))
