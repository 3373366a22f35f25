"""Accelerated hyper-parameter prediction from quantized look-up tables.

A bank holds six 4-input tables for the hyper-parameter predictor (three
indexing patterns x two rotation roles) and optionally three tables for the
pixel pre-processing enhancer. Retrieval quantizes four 8-bit pixels into a
17-per-axis grid cell, interpolates among 5 of the cell's 16 corners
(4-simplex / tetrahedral scheme, exact for affine tables), and fuses the
branches with a directional ensemble: predictions from 180-degree-symmetric
rotations are averaged directly, while 90/270-degree predictions are first
remapped into the canonical orientation (swap the two inverse sigmas, negate
the correlation).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ConfigError, FormatError, ParameterError
from .image import ImageBuffer, luma_plane
from .kernels import KernelFamily, clamp_hyperparams

BITS = 4
GRID = 17                # samples per index dimension (16 cells + upper edge)
CELLS = GRID**4
FIXED_SCALE = 4096.0     # int16 value <-> real value scale
MAGIC = b"LERF"
VERSION = 1

ROLE_0_180 = "deg0_180"
ROLE_90_270 = "deg90_270"
_ROLES = (ROLE_0_180, ROLE_90_270)

# First offset is the anchor pixel. C runs horizontally (sensitive to vertical
# edges once rotated through the ensemble), X runs down the main diagonal.
PATTERN_OFFSETS = {
    "S": ((0, 0), (0, 1), (1, 0), (1, 1)),
    "C": ((0, 0), (0, 1), (0, 2), (0, 3)),
    "X": ((0, 0), (1, 1), (2, 2), (3, 3)),
}
_PATTERNS = ("S", "C", "X")

_PATTERN_CODE = {"S": 0, "C": 1, "X": 2}
_CODE_PATTERN = {v: k for k, v in _PATTERN_CODE.items()}
_ROLE_CODE = {ROLE_0_180: 0, ROLE_90_270: 1}
_CODE_ROLE = {v: k for k, v in _ROLE_CODE.items()}
_FAMILY_CODE = {kernels.AMPLIFIED_LINEAR: 1, kernels.ANISO_GAUSSIAN: 2}
_CODE_FAMILY = {v: k for k, v in _FAMILY_CODE.items()}

_STRIDES = np.array([GRID**3, GRID**2, GRID, 1], dtype=np.int64)


def rotate_offsets(offsets, k: int):
    """Rotate integer (dy, dx) pattern offsets by k quarter turns."""
    k %= 4
    out = []
    for dy, dx in offsets:
        for _ in range(k):
            dy, dx = -dx, dy
        out.append((dy, dx))
    return tuple(out)


@dataclass(frozen=True)
class Pattern:
    name: str
    offsets: tuple = field(default=None)

    def __post_init__(self):
        if self.name not in PATTERN_OFFSETS:
            raise ParameterError(f"unknown pattern {self.name!r}")
        offs = self.offsets if self.offsets is not None else PATTERN_OFFSETS[self.name]
        offs = tuple((int(dy), int(dx)) for dy, dx in offs)
        if len(offs) != 4 or offs[0] != (0, 0):
            raise ParameterError("pattern needs 4 offsets, the first being (0, 0)")
        object.__setattr__(self, "offsets", offs)


@dataclass(frozen=True)
class LutTable:
    """One quantized 4-input table: (GRID^4, c_out) int16 entries at 1/4096 scale."""

    pattern: str
    role: str
    entries: np.ndarray

    def __post_init__(self):
        if self.pattern not in _PATTERNS:
            raise ParameterError(f"unknown pattern {self.pattern!r}")
        if self.role not in _ROLES:
            raise ParameterError(f"unknown rotation role {self.role!r}")
        e = np.asarray(self.entries, dtype=np.int16)
        if e.ndim != 2 or e.shape[0] != CELLS or e.shape[1] not in (1, 3):
            raise FormatError(f"table entries must be ({CELLS}, 1|3), got {e.shape}")
        e = np.ascontiguousarray(e)
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def c_out(self) -> int:
        return self.entries.shape[1]


# Encoded int16 bounds per hyper-parameter channel so that decoded values pass
# clamp_hyperparams unchanged (rint can otherwise land one LSB outside).
def _encoded_bounds(family: KernelFamily):
    lo_eps = int(np.ceil(kernels.HYPER_EPS * FIXED_SCALE))
    if family.kind == kernels.AMPLIFIED_LINEAR:
        return [(lo_eps, int(kernels.ALPHA_MAX * FIXED_SCALE))]
    rho_hi = int(np.floor(kernels.RHO_MAX * FIXED_SCALE))
    sig_hi = int(kernels.INV_SIGMA_MAX * FIXED_SCALE)
    return [(-rho_hi, rho_hi), (lo_eps, sig_hi), (lo_eps, sig_hi)]


def encode_hyper(values: np.ndarray, family: KernelFamily) -> np.ndarray:
    """Real hyper-parameters -> int16 table entries (rint then bound clamp)."""
    values = np.asarray(values, dtype=np.float64)
    enc = np.rint(values * FIXED_SCALE)
    for c, (lo, hi) in enumerate(_encoded_bounds(family)):
        enc[..., c] = np.clip(enc[..., c], lo, hi)
    return enc.astype(np.int16)


def encode_residual(values: np.ndarray) -> np.ndarray:
    """Pixel-correction values -> int16 entries, clamped to +-1.0."""
    enc = np.rint(np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0) * FIXED_SCALE)
    return enc.astype(np.int16)


@dataclass(frozen=True)
class LutBank:
    """Six hyper-parameter tables plus optional three enhancer tables."""

    family: KernelFamily
    f_tables: tuple
    g_tables: tuple = ()

    def __post_init__(self):
        f = tuple(self.f_tables)
        g = tuple(self.g_tables)
        if not self.family.is_adaptive:
            raise ConfigError(f"bank family must be adaptive, got {self.family.kind}")
        expect = [(p, r) for r in _ROLES for p in _PATTERNS]
        got = [(t.pattern, t.role) for t in f]
        if got != expect:
            raise ConfigError(f"f-tables must be {expect} in order, got {got}")
        c = self.family.hyper_channels
        if any(t.c_out != c for t in f):
            raise ConfigError(
                f"{self.family.kind} bank needs c_out={c} f-tables, got "
                f"{[t.c_out for t in f]}"
            )
        if g:
            if [(t.pattern, t.role) for t in g] != [(p, ROLE_0_180) for p in _PATTERNS]:
                raise ConfigError("g-tables must be S,C,X with role deg0_180")
            if any(t.c_out != 1 for t in g):
                raise ConfigError("g-tables must have c_out=1")
        object.__setattr__(self, "f_tables", f)
        object.__setattr__(self, "g_tables", g)

    @property
    def has_enhancer(self) -> bool:
        return len(self.g_tables) > 0


def quantize_index(pixels: np.ndarray):
    """Split [0,1] samples into (corner index in [0,16], fraction in [0,16)).

    The canonical 8-bit value is rint(sample*255); index = v >> 4 and
    fraction = v & 15, so images that round-tripped through PNG quantization
    index exactly.
    """
    v = np.rint(np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0) * 255.0)
    v = v.astype(np.int64)
    return v >> BITS, v & (2**BITS - 1)


def simplex_interp(table: LutTable, indices: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """Interpolate decoded table values at quantized 4-D inputs.

    indices/fractions are (..., 4) integer arrays from quantize_index. The five
    corners of the simplex are chosen by sorting the fractions in descending
    order (stable, so ties break deterministically); barycentric weights are
    the consecutive fraction differences over 16. Exact at zero fractions and
    for tables sampling affine functions.
    """
    idx = np.asarray(indices, dtype=np.int64)
    frac = np.asarray(fractions, dtype=np.int64)
    if idx.shape[-1] != 4 or frac.shape != idx.shape:
        raise ParameterError("indices and fractions must both be (..., 4)")

    order = np.argsort(-frac, axis=-1, kind="stable")
    f_sorted = np.take_along_axis(frac, order, axis=-1).astype(np.float64)
    steps = _STRIDES[order]

    corner = idx @ _STRIDES
    flat = np.empty(idx.shape[:-1] + (5,), dtype=np.int64)
    flat[..., 0] = corner
    for j in range(4):
        corner = corner + steps[..., j]
        flat[..., j + 1] = corner
    # Corners stepped along zero-fraction dims carry zero weight; clip keeps
    # the gather inside the grid for the legal idx=16 / frac=0 upper edge.
    np.clip(flat, 0, CELLS - 1, out=flat)

    w = np.empty(idx.shape[:-1] + (5,), dtype=np.float64)
    w[..., 0] = 16.0 - f_sorted[..., 0]
    w[..., 1] = f_sorted[..., 0] - f_sorted[..., 1]
    w[..., 2] = f_sorted[..., 1] - f_sorted[..., 2]
    w[..., 3] = f_sorted[..., 2] - f_sorted[..., 3]
    w[..., 4] = f_sorted[..., 3]
    w /= 16.0

    vals = table.entries[flat.reshape(-1)].reshape(flat.shape + (table.c_out,))
    vals = vals.astype(np.float64) / FIXED_SCALE
    return np.einsum("...j,...jc->...c", w, vals)


def _gather_pattern_pixels(plane: np.ndarray, offsets) -> np.ndarray:
    """(H, W, 4) pattern samples with replicate clamping at the borders."""
    h, w = plane.shape
    ys = np.arange(h)[:, None]
    xs = np.arange(w)[None, :]
    taps = []
    for dy, dx in offsets:
        yy = np.clip(ys + dy, 0, h - 1)
        xx = np.clip(xs + dx, 0, w - 1)
        taps.append(plane[yy, xx])
    return np.stack(taps, axis=-1)


def _eval_table(plane: np.ndarray, table: LutTable, rot: int) -> np.ndarray:
    offsets = rotate_offsets(PATTERN_OFFSETS[table.pattern], rot)
    pixels = _gather_pattern_pixels(plane, offsets)
    idx, frac = quantize_index(pixels)
    return simplex_interp(table, idx, frac)


def _remap_quarter_turn(values: np.ndarray, family: KernelFamily) -> np.ndarray:
    """Map a prediction made in a 90/270-degree-rotated frame to canonical
    orientation: swap the inverse sigmas and negate rho; alpha is isotropic."""
    if family.kind == kernels.AMPLIFIED_LINEAR:
        return values
    return np.stack([-values[..., 0], values[..., 2], values[..., 1]], axis=-1)


def predict_hyperparams(img: ImageBuffer, bank: LutBank) -> np.ndarray:
    """Per-source-pixel hyper-parameters (H, W, C) via the directional ensemble.

    Each deg0_180 table is evaluated at rotations 0 and 180 and the two
    predictions averaged; each deg90_270 table at rotations 90 and 270 with
    the quarter-turn remap applied before averaging. The final value is the
    mean over the six per-table results, clamped into the stable ranges.
    Prediction runs on the luma plane for RGB inputs.
    """
    plane = luma_plane(img)
    acc = None
    for t in bank.f_tables:
        if t.role == ROLE_0_180:
            pair = 0.5 * (_eval_table(plane, t, 0) + _eval_table(plane, t, 2))
        else:
            a = _remap_quarter_turn(_eval_table(plane, t, 1), bank.family)
            b = _remap_quarter_turn(_eval_table(plane, t, 3), bank.family)
            pair = 0.5 * (a + b)
        acc = pair if acc is None else acc + pair
    theta = acc / len(bank.f_tables)
    return clamp_hyperparams(theta, bank.family)


def apply_g_enhancer(img: ImageBuffer, bank: LutBank) -> ImageBuffer:
    """Add the LUT-retrieved per-pixel correction to every channel.

    Each of the three enhancer tables is evaluated at all four rotations
    (scalar corrections need no remap) and the twelve results averaged; the
    result is clamped back into [0, 1].
    """
    if not bank.has_enhancer:
        raise ConfigError("bank has no enhancer tables")
    out = np.empty_like(img.data)
    for c in range(img.channels):
        plane = img.data[:, :, c]
        acc = None
        for t in bank.g_tables:
            for rot in range(4):
                r = _eval_table(plane, t, rot)[..., 0]
                acc = r if acc is None else acc + r
        residual = acc / (4 * len(bank.g_tables))
        out[:, :, c] = np.clip(plane + residual, 0.0, 1.0)
    return ImageBuffer(out, depth_tag="float", colorspace=img.colorspace)


def make_constant_bank(family: KernelFamily, values, enhancer_residual=None) -> LutBank:
    """Bank whose tables all decode to the given hyper-parameters everywhere.

    Used for the frozen-kernel fixtures (e.g. the isotropic Gaussian
    rho=0, inv_sigma=1 bank) and zero-enhancer tests.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.size != family.hyper_channels:
        raise ConfigError(
            f"{family.kind} needs {family.hyper_channels} values, got {values.size}"
        )
    enc = encode_hyper(values[None, :], family)[0]
    entries = np.tile(enc, (CELLS, 1))
    f_tables = tuple(
        LutTable(p, r, entries) for r in _ROLES for p in _PATTERNS
    )
    g_tables = ()
    if enhancer_residual is not None:
        g_enc = encode_residual(np.array([[enhancer_residual]], dtype=np.float64))[0]
        g_entries = np.tile(g_enc, (CELLS, 1))
        g_tables = tuple(LutTable(p, ROLE_0_180, g_entries) for p in _PATTERNS)
    return LutBank(family, f_tables, g_tables)


def save_lut_bank(bank: LutBank, path) -> None:
    """Write the bank in the little-endian binary format (magic "LERF")."""
    with open(Path(path), "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<BBBB", _FAMILY_CODE[bank.family.kind], BITS,
                            len(bank.f_tables), len(bank.g_tables)))
        for t in list(bank.f_tables) + list(bank.g_tables):
            f.write(struct.pack("<BBBB", _PATTERN_CODE[t.pattern],
                                _ROLE_CODE[t.role], t.c_out, 0))
            f.write(t.entries.astype("<i2").tobytes())


def _verify_decoded_bounds(table: LutTable, family: KernelFamily, path, offset):
    dec = table.entries.astype(np.float64) / FIXED_SCALE
    redone = clamp_hyperparams(dec, family)
    if not np.array_equal(dec, redone):
        raise FormatError(
            f"{path}: f-table at offset {offset} decodes outside hyper-parameter bounds"
        )


def load_lut_bank(path) -> LutBank:
    """Read and validate a bank file; bit-exact inverse of save_lut_bank."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 10:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    if raw[0:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[0:4]!r} at offset 0")
    (version,) = struct.unpack_from("<H", raw, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version} at offset 4")
    fam_code, bits, n_f, n_g = struct.unpack_from("<BBBB", raw, 6)
    if fam_code not in _CODE_FAMILY:
        raise FormatError(f"{path}: unknown family code {fam_code} at offset 6")
    if bits != BITS:
        raise FormatError(f"{path}: unsupported index bits {bits} at offset 7")
    family = KernelFamily(_CODE_FAMILY[fam_code])
    if n_f != 6:
        raise FormatError(f"{path}: expected 6 f-tables, header says {n_f}")
    if n_g not in (0, 3):
        raise FormatError(f"{path}: expected 0 or 3 g-tables, header says {n_g}")

    pos = 10
    tables = []
    for k in range(n_f + n_g):
        if len(raw) < pos + 4:
            raise FormatError(f"{path}: truncated table header at offset {pos}")
        pat_code, role_code, c_out, _ = struct.unpack_from("<BBBB", raw, pos)
        if pat_code not in _CODE_PATTERN:
            raise FormatError(f"{path}: unknown pattern code {pat_code} at offset {pos}")
        if role_code not in _CODE_ROLE:
            raise FormatError(f"{path}: unknown role code {role_code} at offset {pos+1}")
        if c_out not in (1, 3):
            raise FormatError(f"{path}: bad c_out {c_out} at offset {pos+2}")
        pos += 4
        nbytes = CELLS * c_out * 2
        if len(raw) < pos + nbytes:
            raise FormatError(
                f"{path}: table payload truncated at offset {pos} "
                f"(need {nbytes} bytes, have {len(raw) - pos})"
            )
        entries = np.frombuffer(raw, dtype="<i2", count=CELLS * c_out, offset=pos)
        entries = entries.reshape(CELLS, c_out)
        table = LutTable(_CODE_PATTERN[pat_code], _CODE_ROLE[role_code], entries)
        if k < n_f:
            if c_out != family.hyper_channels:
                raise FormatError(
                    f"{path}: family {family.kind} needs c_out={family.hyper_channels}, "
                    f"table at offset {pos-4} has {c_out}"
                )
            _verify_decoded_bounds(table, family, path, pos - 4)
        elif c_out != 1:
            raise FormatError(f"{path}: g-table at offset {pos-4} must have c_out=1")
        tables.append(table)
        pos += nbytes
    if pos != len(raw):
        raise FormatError(f"{path}: {len(raw) - pos} trailing bytes at offset {pos}")
    try:
        return LutBank(family, tuple(tables[:n_f]), tuple(tables[n_f:]))
    except ConfigError as e:
        raise FormatError(f"{path}: {e}") from e
