"""Binary checkpoints.

Layout (little-endian): magic ``b"CNQG"``, format version (u32), ``N`` (u32),
``M_1..M_N`` (u32), ``L_1..L_N`` (f64), ``alpha, nu, eps, t`` (f64), then the
scalar field as ``prod(M)`` row-major f64 values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .spectral import Grid, PhysicalField

MAGIC = b"CNQG"
VERSION = 1


@dataclass(frozen=True)
class Checkpoint:
    field: PhysicalField
    alpha: float
    nu: float
    eps: float
    t: float


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    grid = ckpt.field.grid
    if not ckpt.field.is_scalar:
        raise CheckpointError("checkpoints hold scalar fields only")
    head = MAGIC + struct.pack("<II", VERSION, grid.dim)
    head += struct.pack(f"<{grid.dim}I", *grid.points)
    head += struct.pack(f"<{grid.dim}d", *grid.lengths)
    head += struct.pack("<4d", ckpt.alpha, ckpt.nu, ckpt.eps, ckpt.t)
    return head + np.ascontiguousarray(ckpt.field.values, dtype="<f8").tobytes()


def decode_checkpoint(data: bytes) -> Checkpoint:
    if data[:4] != MAGIC:
        raise CheckpointError("bad magic")
    try:
        version, dim = struct.unpack_from("<II", data, 4)
    except struct.error as exc:
        raise CheckpointError("truncated header") from exc
    if version != VERSION:
        raise CheckpointError(f"unsupported format version {version}")
    if dim not in (1, 2, 3):
        raise CheckpointError(f"invalid dimension {dim}")
    offset = 12
    try:
        points = struct.unpack_from(f"<{dim}I", data, offset)
        offset += 4 * dim
        lengths = struct.unpack_from(f"<{dim}d", data, offset)
        offset += 8 * dim
        alpha, nu, eps, t = struct.unpack_from("<4d", data, offset)
        offset += 32
    except struct.error as exc:
        raise CheckpointError("truncated header") from exc
    count = int(np.prod(points))
    payload = data[offset:]
    if len(payload) != 8 * count:
        raise CheckpointError(f"payload holds {len(payload)} bytes, expected {8 * count}")
    values = np.frombuffer(payload, dtype="<f8").reshape(points).astype(np.float64)
    try:
        grid = Grid(points, lengths)
        field = PhysicalField(grid, values)
    except ValueError as exc:
        raise CheckpointError(str(exc)) from exc
    return Checkpoint(field, alpha, nu, eps, t)


def write_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    Path(path).write_bytes(encode_checkpoint(ckpt))


def read_checkpoint(path: str | Path) -> Checkpoint:
    return decode_checkpoint(Path(path).read_bytes())
