"""Training-pair sampling from a directory of HR crop images."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .degrade import bt601_luma, degrade


class CropSampler:
    """Random luma HR/LR pairs from pre-cut HR crops.

    Images are loaded once, converted to BT.601 luma and kept in memory;
    each batch picks random images and random crop-size windows, degrading
    them with the bicubic assumption at the proxy scale.
    """

    def __init__(self, data_dir, scale: int, crop: int, rng: np.random.Generator):
        paths = sorted(Path(data_dir).glob("*.png"))
        if not paths:
            raise ValueError(f"no PNG crops under {data_dir}")
        self.planes = []
        for p in paths:
            arr = np.asarray(Image.open(p).convert("RGB"), dtype=np.float64) / 255.0
            self.planes.append(np.ascontiguousarray(bt601_luma(arr)))
        self.scale = scale
        self.crop = crop - crop % scale
        self.rng = rng

    def __len__(self):
        return len(self.planes)

    def batch(self, n: int):
        """Returns (lr, hr) float32 arrays of shape (n, 1, c/s, c/s) / (n, 1, c, c)."""
        hr = np.empty((n, 1, self.crop, self.crop), dtype=np.float32)
        lr = np.empty((n, 1, self.crop // self.scale, self.crop // self.scale),
                      dtype=np.float32)
        for i in range(n):
            plane = self.planes[self.rng.integers(len(self.planes))]
            y = self.rng.integers(plane.shape[0] - self.crop + 1)
            x = self.rng.integers(plane.shape[1] - self.crop + 1)
            patch = plane[y : y + self.crop, x : x + self.crop]
            hr[i, 0] = patch
            lr[i, 0] = degrade(patch, self.scale)
        return lr, hr
