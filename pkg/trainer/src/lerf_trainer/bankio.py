"""Reader/writer for the engine's LUT bank file format.

This is the only artifact that crosses the component boundary: little-endian,
magic "LERF", version 1, family byte (1 = amplified linear, 2 = anisotropic
Gaussian), 4 index bits, then per table a 4-byte header (pattern, role,
c_out, reserved) and int16 entries of shape (17^4, c_out) at scale 1/4096.
Tables are stored in canonical order: f-tables as roles (0, 1) x patterns
(S, C, X), then g-tables S, C, X.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"LERF"
VERSION = 1
GRID = 17
CELLS = GRID**4
SCALE = 4096.0

FAMILY_LINEAR = 1
FAMILY_GAUSSIAN = 2

PATTERNS = ("S", "C", "X")
ROLES = ("deg0_180", "deg90_270")
PATTERN_OFFSETS = {
    "S": ((0, 0), (0, 1), (1, 0), (1, 1)),
    "C": ((0, 0), (0, 1), (0, 2), (0, 3)),
    "X": ((0, 0), (1, 1), (2, 2), (3, 3)),
}

# encoded int16 bounds per channel, chosen so decoded values sit inside the
# engine's hyper-parameter clamps
RHO_ENC_MAX = 3891          # floor(0.95 * 4096)
SIG_ENC_MIN = 5             # ceil(1e-3 * 4096)
SIG_ENC_MAX = 16384         # 4.0 * 4096
ALPHA_ENC_MAX = 8192        # 2.0 * 4096


@dataclass
class BankData:
    family: int
    f_tables: list          # list of (pattern, role, int16 (CELLS, c) array)
    g_tables: list

    @property
    def c_out(self) -> int:
        return 3 if self.family == FAMILY_GAUSSIAN else 1


def encode_hyper(values: np.ndarray, family: int) -> np.ndarray:
    """Real hyper-parameter values -> int16 entries within decodable bounds."""
    enc = np.rint(np.asarray(values, dtype=np.float64) * SCALE)
    if family == FAMILY_GAUSSIAN:
        enc[..., 0] = np.clip(enc[..., 0], -RHO_ENC_MAX, RHO_ENC_MAX)
        enc[..., 1] = np.clip(enc[..., 1], SIG_ENC_MIN, SIG_ENC_MAX)
        enc[..., 2] = np.clip(enc[..., 2], SIG_ENC_MIN, SIG_ENC_MAX)
    else:
        enc[..., 0] = np.clip(enc[..., 0], SIG_ENC_MIN, ALPHA_ENC_MAX)
    return enc.astype(np.int16)


def encode_residual(values: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(np.asarray(values, dtype=np.float64), -1, 1) * SCALE).astype(np.int16)


def write_bank(bank: BankData, path) -> None:
    order = [(p, r) for r in ROLES for p in PATTERNS]
    got = [(p, r) for p, r, _ in bank.f_tables]
    if got != order:
        raise ValueError(f"f-tables must be in canonical order {order}, got {got}")
    with open(Path(path), "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<BBBB", bank.family, 4, len(bank.f_tables), len(bank.g_tables)))
        for pat, role, entries in bank.f_tables + bank.g_tables:
            entries = np.asarray(entries, dtype=np.int16)
            if entries.shape[0] != CELLS:
                raise ValueError(f"table must have {CELLS} rows, got {entries.shape}")
            f.write(struct.pack("<BBBB", PATTERNS.index(pat), ROLES.index(role),
                                entries.shape[1], 0))
            f.write(entries.astype("<i2").tobytes())


def read_bank(path) -> BankData:
    raw = Path(path).read_bytes()
    if raw[0:4] != MAGIC:
        raise ValueError(f"{path}: bad magic")
    (version,) = struct.unpack_from("<H", raw, 4)
    family, bits, n_f, n_g = struct.unpack_from("<BBBB", raw, 6)
    if version != VERSION or bits != 4:
        raise ValueError(f"{path}: unsupported version/bits {version}/{bits}")
    pos = 10
    tables = []
    for _ in range(n_f + n_g):
        pat_c, role_c, c_out, _ = struct.unpack_from("<BBBB", raw, pos)
        pos += 4
        entries = np.frombuffer(raw, dtype="<i2", count=CELLS * c_out, offset=pos)
        tables.append((PATTERNS[pat_c], ROLES[role_c], entries.reshape(CELLS, c_out).copy()))
        pos += CELLS * c_out * 2
    return BankData(family, tables[:n_f], tables[n_f:])
