"""Raster containers, color conversion, padding and separable Gaussian filtering.

All images live in a canonical floating-point [0, 1] domain; quantization
happens only at file boundaries (PNG load/save).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy.ndimage import correlate1d

from .errors import DecodeError, ParameterError, ShapeError

# BT.601 limited-range luma coefficients (MATLAB rgb2ycbcr convention),
# applied to R,G,B in [0,1]; output also in [0,1] via the /255 fold.
_LUMA_W = (65.481, 128.553, 24.966)
_LUMA_OFFSET = 16.0


class BoundaryPolicy(Enum):
    """How out-of-bounds reads resolve. Only replicate is implemented."""

    REPLICATE = "replicate"


@dataclass(frozen=True)
class ImageBuffer:
    """Immutable (H, W, C) float raster in [0, 1], C in {1, 3}.

    depth_tag records the bit depth of the originating data ("u8" for files,
    "float" for synthesized buffers); colorspace is "rgb", "y" or "generic".
    """

    data: np.ndarray
    depth_tag: str = "float"
    colorspace: str = "generic"

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ShapeError(f"image must be (H, W, 1|3), got {np.shape(self.data)}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def plane(self, c: int = 0) -> np.ndarray:
        return self.data[:, :, c]


def load_image(path) -> ImageBuffer:
    """Decode an 8-bit grayscale or RGB PNG into a canonical buffer."""
    path = Path(path)
    if not path.is_file():
        raise DecodeError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            if (im.format or "").upper() != "PNG":
                raise DecodeError(f"{path}: unsupported format {im.format!r}, need PNG")
            if im.mode not in ("L", "RGB"):
                raise DecodeError(
                    f"{path}: unsupported PNG mode {im.mode!r} "
                    "(need 8-bit grayscale or RGB, no alpha/palette/16-bit)"
                )
            arr = np.asarray(im, dtype=np.float64) / 255.0
    except UnidentifiedImageError as e:
        raise DecodeError(f"{path}: not a decodable image ({e})") from e
    colorspace = "rgb" if arr.ndim == 3 else "generic"
    return ImageBuffer(arr, depth_tag="u8", colorspace=colorspace)


def save_image(img: ImageBuffer, path) -> None:
    """Quantize to 8 bits (clamp then round) and write a PNG."""
    arr = np.clip(img.data, 0.0, 1.0)
    q = np.rint(arr * 255.0).astype(np.uint8)
    if q.shape[2] == 1:
        pil = Image.fromarray(q[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(q, mode="RGB")
    pil.save(Path(path), format="PNG")


def rgb_to_luma(img: ImageBuffer) -> ImageBuffer:
    """BT.601 limited-range luma: Y = (16 + 65.481 R + 128.553 G + 24.966 B)/255."""
    if img.channels != 3:
        raise ShapeError(f"rgb_to_luma needs 3 channels, got {img.channels}")
    r, g, b = img.data[:, :, 0], img.data[:, :, 1], img.data[:, :, 2]
    y = (_LUMA_OFFSET + _LUMA_W[0] * r + _LUMA_W[1] * g + _LUMA_W[2] * b) / 255.0
    return ImageBuffer(y, depth_tag=img.depth_tag, colorspace="y")


def luma_plane(img: ImageBuffer) -> np.ndarray:
    """The (H, W) plane structural predictions run on: BT.601 luma for RGB,
    the stored channel otherwise."""
    if img.channels == 3:
        return rgb_to_luma(img).plane()
    return img.plane()


def pad_read(img: ImageBuffer, row: int, col: int,
             policy: BoundaryPolicy = BoundaryPolicy.REPLICATE) -> np.ndarray:
    """Read one pixel (all channels) with replicate clamping of coordinates."""
    r = min(max(row, 0), img.height - 1)
    c = min(max(col, 0), img.width - 1)
    return img.data[r, c]


def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Normalized Gaussian taps truncated at radius ceil(3 sigma)."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_filter(img: ImageBuffer, sigma) -> ImageBuffer:
    """Separable Gaussian blur with replicate boundary.

    sigma is a scalar for an isotropic filter or a (sigma_y, sigma_x) pair.
    """
    if np.isscalar(sigma):
        sig_y = sig_x = float(sigma)
    else:
        sig_y, sig_x = (float(s) for s in sigma)
    ky = gaussian_kernel_1d(sig_y)
    kx = gaussian_kernel_1d(sig_x)
    out = img.data
    out = correlate1d(out, ky, axis=0, mode="nearest")
    out = correlate1d(out, kx, axis=1, mode="nearest")
    return ImageBuffer(out, depth_tag="float", colorspace=img.colorspace)
