"""Traverse all quantized inputs of each branch and write the bank file."""
from __future__ import annotations

import numpy as np
import torch


class ExportError(RuntimeError):
    pass

from .bankio import (
    BankData,
    CELLS,
    FAMILY_GAUSSIAN,
    GRID,
    PATTERNS,
    ROLES,
    encode_hyper,
    encode_residual,
    write_bank,
)
from .model import EnhancerNet, HyperNet

# corner k of the 17-per-axis grid samples byte value min(16 k, 255)
CORNER_BYTES = np.minimum(np.arange(GRID) * 16, 255)


def _corner_tuples() -> torch.Tensor:
    g = np.stack(np.meshgrid(*[CORNER_BYTES] * 4, indexing="ij"), axis=-1)
    return torch.from_numpy((g.reshape(CELLS, 4) / 255.0).astype(np.float32))


def export_bank(f_net: HyperNet, path, g_net: EnhancerNet = None,
                batch: int = 83521) -> None:
    """Evaluate every branch on all 17^4 corner tuples and write the bank."""
    quads = _corner_tuples()
    f_tables = []
    g_tables = []
    with torch.no_grad():
        for role in ROLES:
            for pattern in PATTERNS:
                branch = f_net.branches[f"{pattern}_{role}"]
                vals = _eval_in_batches(branch, quads, batch)
                _check_encodable(vals, f_net.family, f"{pattern}_{role}")
                f_tables.append((pattern, role, encode_hyper(vals, f_net.family)))
        if g_net is not None:
            for pattern in PATTERNS:
                vals = _eval_in_batches(g_net.branches[pattern], quads, batch)
                g_tables.append((pattern, "deg0_180", encode_residual(vals)))
    write_bank(BankData(f_net.family, f_tables, g_tables), path)


# anything beyond the hyper-parameter ranges by more than rounding slack
# cannot come from the bounded heads and signals a broken checkpoint
_ENC_SLACK = 1e-3


def _check_encodable(vals: np.ndarray, family: int, branch_name: str):
    if family == FAMILY_GAUSSIAN:
        bad = (np.abs(vals[:, 0]) > 0.95 + _ENC_SLACK) \
            | (vals[:, 1] <= 0) | (vals[:, 1] > 4.0 + _ENC_SLACK) \
            | (vals[:, 2] <= 0) | (vals[:, 2] > 4.0 + _ENC_SLACK)
    else:
        bad = (vals[:, 0] <= 0) | (vals[:, 0] > 2.0 + _ENC_SLACK)
    if np.any(bad):
        corner = int(np.argmax(bad))
        raise ExportError(
            f"branch {branch_name}: value {vals[corner].tolist()} at corner "
            f"{corner} is outside the encodable hyper-parameter range"
        )


def _eval_in_batches(branch, quads, batch):
    outs = []
    for i in range(0, quads.shape[0], batch):
        outs.append(branch.forward_tuples(quads[i : i + batch]).double().numpy())
    return np.concatenate(outs, axis=0)
