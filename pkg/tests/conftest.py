import numpy as np
import pytest

from lerf import ImageBuffer, kernels
from lerf.lut import (
    CELLS,
    PATTERN_OFFSETS,
    ROLE_0_180,
    ROLE_90_270,
    LutBank,
    LutTable,
    make_constant_bank,
)

SET5_DIR = __file__.rsplit("/", 1)[0] + "/data/Set5"
FIXTURE_DIR = __file__.rsplit("/", 1)[0] + "/fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def frozen_gauss_bank():
    """Isotropic frozen-kernel bank: rho=0, inv_sigma=1 everywhere."""
    return make_constant_bank(kernels.aniso_gaussian(), [0.0, 1.0, 1.0])


def random_valid_bank(seed, family=None, with_g=False) -> LutBank:
    """Seeded bank whose entries are arbitrary but inside the decodable bounds."""
    family = family or kernels.aniso_gaussian()
    r = np.random.default_rng(seed)
    f_tables = []
    for role in (ROLE_0_180, ROLE_90_270):
        for pat in ("S", "C", "X"):
            if family.kind == kernels.ANISO_GAUSSIAN:
                rho = r.integers(-3891, 3892, size=(CELLS, 1))
                sig = r.integers(5, 16385, size=(CELLS, 2))
                entries = np.concatenate([rho, sig], axis=1).astype(np.int16)
            else:
                entries = r.integers(5, 8193, size=(CELLS, 1)).astype(np.int16)
            f_tables.append(LutTable(pat, role, entries))
    g_tables = ()
    if with_g:
        g_tables = tuple(
            LutTable(pat, ROLE_0_180, r.integers(-409, 410, size=(CELLS, 1)).astype(np.int16))
            for pat in ("S", "C", "X")
        )
    return LutBank(family, tuple(f_tables), g_tables)


def random_image(seed, h, w, c=3) -> ImageBuffer:
    r = np.random.default_rng(seed)
    # quantized to the 8-bit grid like a file-loaded image
    data = np.rint(r.random((h, w, c)) * 255.0) / 255.0
    return ImageBuffer(data, depth_tag="u8", colorspace="rgb" if c == 3 else "generic")


def five_transforms(src_hw, tgt_hw):
    """Representative transform mix sharing one (src, target) size pair."""
    from lerf import Flow, Homography, Scale

    h, w = src_hw
    m = np.array([[0.8, 0.05, 1.0], [-0.03, 0.9, 0.5], [1e-4, -2e-4, 1.0]])
    r = np.random.default_rng(7)
    flow = r.uniform(-1.5, 1.5, tgt_hw + (2,))
    return [
        Scale(tgt_hw[0] / h, tgt_hw[1] / w),
        Scale(1.37, 0.61),
        Homography(m),
        Homography(np.linalg.inv(m), target_to_source=False),
        Flow(flow),
    ]


def smooth_image(seed, h, w, c=3) -> ImageBuffer:
    """Band-limited random image: low-order 2-D cosine mixture in [0.1, 0.9]."""
    r = np.random.default_rng(seed)
    y, x = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    img = np.zeros((h, w, c))
    for ch in range(c):
        acc = np.zeros((h, w))
        for _ in range(4):
            fy, fx = r.uniform(0, 0.06, 2)
            ph = r.uniform(0, 2 * np.pi, 2)
            acc += np.cos(2 * np.pi * fy * y + ph[0]) * np.cos(2 * np.pi * fx * x + ph[1])
        acc = (acc - acc.min()) / (acc.max() - acc.min())
        img[:, :, ch] = 0.1 + 0.8 * acc
    return ImageBuffer(img, colorspace="rgb" if c == 3 else "generic")
