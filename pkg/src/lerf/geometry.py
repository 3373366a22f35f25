"""Geometric transforms and target->source sample grids.

Backward warping throughout: every target pixel is projected into the source
frame with the pixel-center convention src = (t + 0.5)/r - 0.5, which makes a
x1 scale an exact identity. The 2x2 support anchor is floor(src); fractional
offsets live in [0, 1).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DecodeError, FormatError, ParameterError, ShapeError

FLO_MAGIC = 202021.25

# Source coordinates up to half a pixel outside the border still count as
# valid: the replicate-padded 2x2 support covers them without extrapolating.
_VALID_MARGIN = 0.5


@dataclass(frozen=True)
class Scale:
    r_h: float
    r_w: float

    def __post_init__(self):
        if not (self.r_h > 0 and self.r_w > 0):
            raise ParameterError(f"scale factors must be > 0, got {self.r_h}, {self.r_w}")


@dataclass(frozen=True)
class Homography:
    """3x3 projective map. target_to_source=True means the matrix already maps
    target homogeneous coords into the source frame (backward form); forward
    matrices are inverted once at grid build."""

    matrix: np.ndarray
    target_to_source: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ShapeError(f"homography must be 3x3, got {m.shape}")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ParameterError("homography matrix is singular")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def backward_matrix(self) -> np.ndarray:
        return self.matrix if self.target_to_source else np.linalg.inv(self.matrix)


@dataclass(frozen=True)
class Flow:
    """Per-target-pixel backward displacement field, (H, W, 2) float,
    channel 0 = x displacement (u), channel 1 = y displacement (v)."""

    field: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.field, dtype=np.float64)
        if f.ndim != 3 or f.shape[2] != 2:
            raise ShapeError(f"flow field must be (H, W, 2), got {f.shape}")
        f = f.copy()
        f.flags.writeable = False
        object.__setattr__(self, "field", f)


GeometricTransform = Scale | Homography | Flow


@dataclass(frozen=True)
class SampleGrid:
    """Continuous source coordinates and integer support anchors per target pixel."""

    target_h: int
    target_w: int
    src_y: np.ndarray
    src_x: np.ndarray
    base_y: np.ndarray
    base_x: np.ndarray
    frac_y: np.ndarray
    frac_x: np.ndarray
    valid: np.ndarray


def back_project_scale(r_h: float, r_w: float, ty, tx):
    """Map target pixel indices to continuous source coordinates."""
    if not (r_h > 0 and r_w > 0):
        raise ParameterError(f"scale factors must be > 0, got {r_h}, {r_w}")
    sy = (np.asarray(ty, dtype=np.float64) + 0.5) / r_h - 0.5
    sx = (np.asarray(tx, dtype=np.float64) + 0.5) / r_w - 0.5
    return sy, sx


def back_project_homography(m: np.ndarray, ty, tx, src_h: int, src_w: int):
    """Project target pixel centers through a target->source 3x3 matrix.

    Returns (sy, sx, valid); a point is invalid when its homogeneous weight
    w <= 1e-9 or the source coordinate falls more than half a pixel outside
    the source raster.
    """
    m = np.asarray(m, dtype=np.float64)
    if abs(np.linalg.det(m)) <= 1e-12:
        raise ParameterError("homography matrix is singular")
    xt = np.asarray(tx, dtype=np.float64) + 0.5
    yt = np.asarray(ty, dtype=np.float64) + 0.5
    xs = m[0, 0] * xt + m[0, 1] * yt + m[0, 2]
    ys = m[1, 0] * xt + m[1, 1] * yt + m[1, 2]
    w = m[2, 0] * xt + m[2, 1] * yt + m[2, 2]
    valid = w > 1e-9
    w_safe = np.where(valid, w, 1.0)
    sx = xs / w_safe - 0.5
    sy = ys / w_safe - 0.5
    valid = valid & _inside_source(sy, sx, src_h, src_w)
    return sy, sx, valid


def _inside_source(sy, sx, src_h, src_w):
    return (
        (sy >= -_VALID_MARGIN)
        & (sy <= src_h - 1 + _VALID_MARGIN)
        & (sx >= -_VALID_MARGIN)
        & (sx <= src_w - 1 + _VALID_MARGIN)
    )


def build_sample_grid(transform: GeometricTransform, src_hw, target_hw) -> SampleGrid:
    """Back-project every target pixel and split coordinates into anchor + frac."""
    src_h, src_w = src_hw
    tgt_h, tgt_w = target_hw
    if min(src_h, src_w, tgt_h, tgt_w) <= 0:
        raise ParameterError("image dimensions must be positive")
    ty, tx = np.meshgrid(np.arange(tgt_h), np.arange(tgt_w), indexing="ij")

    if isinstance(transform, Scale):
        sy, sx = back_project_scale(transform.r_h, transform.r_w, ty, tx)
        valid = np.ones((tgt_h, tgt_w), dtype=bool)
    elif isinstance(transform, Homography):
        m = transform.backward_matrix()
        sy, sx, valid = back_project_homography(m, ty, tx, src_h, src_w)
    elif isinstance(transform, Flow):
        if transform.field.shape[:2] != (tgt_h, tgt_w):
            raise ShapeError(
                f"flow field {transform.field.shape[:2]} does not match target {(tgt_h, tgt_w)}"
            )
        sx = tx + transform.field[:, :, 0]
        sy = ty + transform.field[:, :, 1]
        valid = _inside_source(sy, sx, src_h, src_w)
    else:
        raise ParameterError(f"unknown transform {transform!r}")

    base_y = np.floor(sy).astype(np.int64)
    base_x = np.floor(sx).astype(np.int64)
    frac_y = sy - base_y
    frac_x = sx - base_x
    return SampleGrid(tgt_h, tgt_w, sy, sx, base_y, base_x, frac_y, frac_x, valid)


def load_homography(path) -> np.ndarray:
    """Read 9 whitespace-separated reals (row-major 3x3) from a text file."""
    path = Path(path)
    if not path.is_file():
        raise DecodeError(f"no such matrix file: {path}")
    try:
        vals = [float(tok) for tok in path.read_text().split()]
    except ValueError as e:
        raise FormatError(f"{path}: non-numeric token in homography file") from e
    if len(vals) != 9:
        raise FormatError(f"{path}: expected 9 values, got {len(vals)}")
    return np.array(vals, dtype=np.float64).reshape(3, 3)


def load_flow(path) -> Flow:
    """Read a Middlebury .flo file (magic 202021.25, w, h, interleaved u,v)."""
    path = Path(path)
    if not path.is_file():
        raise DecodeError(f"no such flow file: {path}")
    raw = path.read_bytes()
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated .flo header ({len(raw)} bytes)")
    magic = struct.unpack("<f", raw[0:4])[0]
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: bad .flo magic {magic!r}")
    w, h = struct.unpack("<ii", raw[4:12])
    if w <= 0 or h <= 0:
        raise FormatError(f"{path}: bad .flo dimensions {w}x{h}")
    expected = 12 + 8 * w * h
    if len(raw) != expected:
        raise FormatError(f"{path}: .flo payload is {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f4", offset=12).reshape(h, w, 2)
    return Flow(data.astype(np.float64))


def save_flow(flow: Flow, path) -> None:
    h, w = flow.field.shape[:2]
    with open(Path(path), "wb") as f:
        f.write(struct.pack("<f", FLO_MAGIC))
        f.write(struct.pack("<ii", w, h))
        f.write(flow.field.astype("<f4").tobytes())
