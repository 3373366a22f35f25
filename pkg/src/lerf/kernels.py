"""Resampling weight functions.

Fixed families (nearest, linear, Keys cubic, Lanczos) map a signed offset to a
weight; the two adaptive families (amplified linear, anisotropic Gaussian) are
additionally shaped by per-pixel hyper-parameters. Every 2-D weight vector
returned here is normalized to sum to 1, so constant images are preserved
exactly by any aggregation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

ALPHA_MAX = 2.0
RHO_MAX = 0.95
INV_SIGMA_MAX = 4.0
HYPER_EPS = 1e-3  # lower clamp for alpha and the inverse sigmas

NEAREST = "nearest"
LINEAR = "linear"
KEYS_CUBIC = "keys_cubic"
LANCZOS = "lanczos"
AMPLIFIED_LINEAR = "amplified_linear"
ANISO_GAUSSIAN = "aniso_gaussian"

_FIXED_KINDS = (NEAREST, LINEAR, KEYS_CUBIC, LANCZOS)
_ADAPTIVE_KINDS = (AMPLIFIED_LINEAR, ANISO_GAUSSIAN)


@dataclass(frozen=True)
class KernelFamily:
    """Tagged resampling-function family.

    kind selects the family; `a` is the Keys cubic shape parameter and
    `lobes` the Lanczos window (2 or 3). Adaptive families take their
    hyper-parameters per call, not here.
    """

    kind: str
    a: float = -0.5
    lobes: int = 2

    def __post_init__(self):
        if self.kind not in _FIXED_KINDS + _ADAPTIVE_KINDS:
            raise ParameterError(f"unknown kernel family {self.kind!r}")
        if self.kind == LANCZOS and self.lobes not in (2, 3):
            raise ParameterError(f"lanczos lobes must be 2 or 3, got {self.lobes}")
        if self.kind == KEYS_CUBIC and not np.isfinite(self.a):
            raise ParameterError("keys cubic shape parameter must be finite")

    @property
    def is_adaptive(self) -> bool:
        return self.kind in _ADAPTIVE_KINDS

    @property
    def support(self) -> int:
        """Taps per axis of the support patch."""
        if self.kind in (NEAREST, LINEAR, AMPLIFIED_LINEAR, ANISO_GAUSSIAN):
            return 2
        if self.kind == KEYS_CUBIC:
            return 4
        return 2 * self.lobes

    @property
    def hyper_channels(self) -> int:
        if self.kind == AMPLIFIED_LINEAR:
            return 1
        if self.kind == ANISO_GAUSSIAN:
            return 3
        return 0


def nearest() -> KernelFamily:
    return KernelFamily(NEAREST)


def linear() -> KernelFamily:
    return KernelFamily(LINEAR)


def keys_cubic(a: float = -0.5) -> KernelFamily:
    return KernelFamily(KEYS_CUBIC, a=a)


def lanczos(lobes: int) -> KernelFamily:
    return KernelFamily(LANCZOS, lobes=lobes)


def amplified_linear() -> KernelFamily:
    return KernelFamily(AMPLIFIED_LINEAR)


def aniso_gaussian() -> KernelFamily:
    return KernelFamily(ANISO_GAUSSIAN)


def keys_cubic_1d(x, a: float = -0.5) -> np.ndarray:
    """Piecewise Keys cubic: (a+2)|x|^3-(a+3)|x|^2+1 on [0,1],
    a|x|^3-5a|x|^2+8a|x|-4a on (1,2), 0 beyond."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x)
    near = x <= 1.0
    mid = (x > 1.0) & (x < 2.0)
    xn = x[near]
    xm = x[mid]
    out[near] = (a + 2.0) * xn**3 - (a + 3.0) * xn**2 + 1.0
    out[mid] = a * xm**3 - 5.0 * a * xm**2 + 8.0 * a * xm - 4.0 * a
    return out


def lanczos_1d(x, lobes: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.sinc(x) * np.sinc(x / lobes)
    return np.where(np.abs(x) < lobes, out, 0.0)


def linear_1d(x) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(np.asarray(x, dtype=np.float64)))


def nearest_1d(x) -> np.ndarray:
    # weight 1 iff |x| <= 0.5, ties resolved toward the lower coordinate:
    # x = frac - tap, so the tie x = +0.5 (lower tap) wins over x = -0.5.
    x = np.asarray(x, dtype=np.float64)
    return ((x > -0.5) & (x <= 0.5)).astype(np.float64)


def eval_fixed_1d(family: KernelFamily, x) -> np.ndarray:
    """Evaluate a fixed family's 1-D profile at signed offsets x."""
    if family.is_adaptive:
        raise ParameterError(f"{family.kind} has no fixed 1-D profile")
    if family.kind == KEYS_CUBIC:
        return keys_cubic_1d(x, family.a)
    if family.kind == LANCZOS:
        return lanczos_1d(x, family.lobes)
    if family.kind == LINEAR:
        return linear_1d(x)
    return nearest_1d(x)


def support_taps(family: KernelFamily) -> np.ndarray:
    """Integer tap offsets per axis relative to the floor() anchor."""
    s = family.support
    return np.arange(s) - (s // 2 - 1)


def weights_fixed_2d(family: KernelFamily, frac_y, frac_x) -> np.ndarray:
    """Separable 2-D weights over the family's support, normalized to sum 1.

    frac_y/frac_x are offsets in [0, 1) of the continuous source coordinate
    from its floor() anchor; scalars or equal-shape arrays. Returns weights of
    shape frac.shape + (support, support), ordered row-major over (dy, dx).
    """
    frac_y = np.asarray(frac_y, dtype=np.float64)
    frac_x = np.asarray(frac_x, dtype=np.float64)
    taps = support_taps(family)
    wy = eval_fixed_1d(family, frac_y[..., None] - taps)
    wx = eval_fixed_1d(family, frac_x[..., None] - taps)
    w = wy[..., :, None] * wx[..., None, :]
    total = w.sum(axis=(-2, -1), keepdims=True)
    return w / total


def _validate_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ParameterError(f"{name}: non-finite hyper-parameter input")


def weights_amplified_linear(alpha, u, v) -> np.ndarray:
    """Amplified-linear weights over a 2x2 support.

    alpha, u, v: (..., 4) arrays; (u, v) are the signed x/y components of the
    offset from support pixel p to the target, each in (-1, 1), alpha in
    (0, ALPHA_MAX]. Raw weight max(0, 1-a|u|) * max(0, 1-a|v|), normalized to
    sum 1; when all four raw weights vanish the nearest support pixel takes
    weight 1.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _validate_finite("weights_amplified_linear", alpha)
    if np.any(alpha <= 0) or np.any(alpha > ALPHA_MAX):
        raise ParameterError(f"alpha outside (0, {ALPHA_MAX}]")
    raw = np.maximum(0.0, 1.0 - alpha * np.abs(u)) * np.maximum(0.0, 1.0 - alpha * np.abs(v))
    total = raw.sum(axis=-1, keepdims=True)
    dead = total == 0.0
    if np.any(dead):
        d2 = u * u + v * v
        onehot = (np.argmin(d2, axis=-1)[..., None] == np.arange(raw.shape[-1])).astype(np.float64)
        raw = np.where(dead, onehot, raw)
        total = raw.sum(axis=-1, keepdims=True)
    return raw / total


def weights_aniso_gaussian(rho, inv_sx, inv_sy, u, v) -> np.ndarray:
    """Anisotropic-Gaussian weights over a 2x2 support, normalized to sum 1.

    Stabilized parameterization: raw weight exp(-Q/2) with
    Q = (u^2 isx^2 - 2 rho isx isy u v + v^2 isy^2) / (1 - rho^2),
    no determinant multiplier. All arguments are (..., 4) arrays; u is the x
    component of the offset (paired with inv_sx) and v the y component.
    """
    rho = np.asarray(rho, dtype=np.float64)
    inv_sx = np.asarray(inv_sx, dtype=np.float64)
    inv_sy = np.asarray(inv_sy, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _validate_finite("weights_aniso_gaussian", rho, inv_sx, inv_sy)
    if np.any(np.abs(rho) >= 1.0):
        raise ParameterError("|rho| must be < 1")
    if np.any(inv_sx <= 0) or np.any(inv_sy <= 0):
        raise ParameterError("inverse sigmas must be > 0")
    q = (u * u * inv_sx**2 - 2.0 * rho * inv_sx * inv_sy * u * v + v * v * inv_sy**2)
    q = q / (1.0 - rho * rho)
    raw = np.exp(-0.5 * q)
    return raw / raw.sum(axis=-1, keepdims=True)


def clamp_hyperparams(raw, family: KernelFamily) -> np.ndarray:
    """Clamp raw hyper-parameters into their stable ranges.

    Amplified linear: (..., 1) alpha -> [HYPER_EPS, ALPHA_MAX].
    Anisotropic Gaussian: (..., 3) (rho, inv_sx, inv_sy) ->
    [-RHO_MAX, RHO_MAX] x [HYPER_EPS, INV_SIGMA_MAX]^2.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(raw)):
        raise ParameterError("clamp_hyperparams: NaN/inf input")
    c = family.hyper_channels
    if c == 0:
        raise ParameterError(f"{family.kind} has no hyper-parameters")
    if raw.shape[-1] != c:
        raise ParameterError(f"expected {c} hyper channels, got {raw.shape[-1]}")
    out = raw.copy()
    if family.kind == AMPLIFIED_LINEAR:
        out[..., 0] = np.clip(out[..., 0], HYPER_EPS, ALPHA_MAX)
    else:
        out[..., 0] = np.clip(out[..., 0], -RHO_MAX, RHO_MAX)
        out[..., 1] = np.clip(out[..., 1], HYPER_EPS, INV_SIGMA_MAX)
        out[..., 2] = np.clip(out[..., 2], HYPER_EPS, INV_SIGMA_MAX)
    return out
