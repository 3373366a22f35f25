"""Numpy mirror of the engine's LUT retrieval, for parity measurement.

Implements the documented lookup semantics of the bank file: 4-bit index
split, 4-simplex interpolation over sorted fractions, directional ensemble
with quarter-turn remapping. Agreement with the engine itself is pinned by a
cross-component test; the parity CLI uses this mirror so the shipped trainer
never links against the engine.
"""
from __future__ import annotations

import numpy as np

from .bankio import (
    BankData,
    FAMILY_GAUSSIAN,
    GRID,
    PATTERN_OFFSETS,
    SCALE,
)

_STRIDES = np.array([GRID**3, GRID**2, GRID, 1], dtype=np.int64)


def rotate_offsets(offsets, k):
    k %= 4
    out = []
    for dy, dx in offsets:
        for _ in range(k):
            dy, dx = -dx, dy
        out.append((dy, dx))
    return tuple(out)


def quantize(pixels: np.ndarray):
    v = np.rint(np.clip(pixels, 0.0, 1.0) * 255.0).astype(np.int64)
    return v >> 4, v & 15


def simplex_lookup(entries: np.ndarray, idx: np.ndarray, frac: np.ndarray) -> np.ndarray:
    order = np.argsort(-frac, axis=-1, kind="stable")
    f_sorted = np.take_along_axis(frac, order, axis=-1).astype(np.float64)
    steps = _STRIDES[order]
    corner = idx @ _STRIDES
    flat = np.empty(idx.shape[:-1] + (5,), dtype=np.int64)
    flat[..., 0] = corner
    for j in range(4):
        corner = corner + steps[..., j]
        flat[..., j + 1] = corner
    np.clip(flat, 0, GRID**4 - 1, out=flat)
    w = np.empty(idx.shape[:-1] + (5,), dtype=np.float64)
    w[..., 0] = 16.0 - f_sorted[..., 0]
    w[..., 1:4] = f_sorted[..., :3] - f_sorted[..., 1:]
    w[..., 4] = f_sorted[..., 3]
    w /= 16.0
    vals = entries[flat.reshape(-1)].reshape(flat.shape + (entries.shape[1],))
    return np.einsum("...j,...jc->...c", w, vals.astype(np.float64) / SCALE)


def _gather(plane: np.ndarray, offsets) -> np.ndarray:
    h, w = plane.shape
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    return np.stack(
        [plane[np.clip(ys + dy, 0, h - 1), np.clip(xs + dx, 0, w - 1)] for dy, dx in offsets],
        axis=-1,
    )


def _eval_table(plane, pattern, entries, rot):
    idx, frac = quantize(_gather(plane, rotate_offsets(PATTERN_OFFSETS[pattern], rot)))
    return simplex_lookup(entries, idx, frac)


def _remap(vals, family):
    if family != FAMILY_GAUSSIAN:
        return vals
    return np.stack([-vals[..., 0], vals[..., 2], vals[..., 1]], axis=-1)


def predict_from_bank(bank: BankData, plane: np.ndarray) -> np.ndarray:
    """(H, W) luma plane -> (H, W, C) hyper-parameters via the bank tables."""
    acc = None
    for pattern, role, entries in bank.f_tables:
        if role == "deg0_180":
            pair = 0.5 * (_eval_table(plane, pattern, entries, 0)
                          + _eval_table(plane, pattern, entries, 2))
        else:
            pair = 0.5 * (_remap(_eval_table(plane, pattern, entries, 1), bank.family)
                          + _remap(_eval_table(plane, pattern, entries, 3), bank.family))
        acc = pair if acc is None else acc + pair
    theta = acc / len(bank.f_tables)
    if bank.family == FAMILY_GAUSSIAN:
        theta[..., 0] = np.clip(theta[..., 0], -0.95, 0.95)
        theta[..., 1:] = np.clip(theta[..., 1:], 1e-3, 4.0)
    else:
        theta[..., 0] = np.clip(theta[..., 0], 1e-3, 2.0)
    return theta


def enhance_from_bank(bank: BankData, plane: np.ndarray) -> np.ndarray:
    """(H, W) plane -> enhanced plane using the g-tables (all four rotations)."""
    if not bank.g_tables:
        raise ValueError("bank has no enhancer tables")
    acc = None
    for pattern, _, entries in bank.g_tables:
        for rot in range(4):
            r = _eval_table(plane, pattern, entries, rot)[..., 0]
            acc = r if acc is None else acc + r
    return np.clip(plane + acc / (4 * len(bank.g_tables)), 0.0, 1.0)
