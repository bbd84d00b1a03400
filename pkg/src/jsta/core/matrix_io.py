"""Binary matrix files and JSON sidecars.

Layout of a ``.cmat`` file (all little-endian)::

    bytes  0..11   magic  b"JSTA-MATRIX\\0"
    bytes 12..15   uint32 format version (1)
    bytes 16..23   uint64 rows
    bytes 24..31   uint64 cols
    bytes 32..     rows*cols pairs of float64 (re, im), row-major
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import ContractError, MissingDataError

MAGIC = b"JSTA-MATRIX\x00"
VERSION = 1
_HEADER = struct.Struct("<12sI")
_DIMS = struct.Struct("<QQ")


def write_matrix(path, values) -> Path:
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ContractError(f"only 2D matrices can be written, got ndim={arr.ndim}")
    data = np.ascontiguousarray(arr, dtype="<c16")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION))
        fh.write(_DIMS.pack(*data.shape))
        fh.write(data.tobytes(order="C"))
    return path


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"matrix file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size + _DIMS.size:
        raise ContractError(f"{path}: truncated header")
    magic, version = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ContractError(f"{path}: not a matrix file (bad magic)")
    if version != VERSION:
        raise ContractError(f"{path}: unsupported format version {version}")
    rows, cols = _DIMS.unpack_from(raw, _HEADER.size)
    body = raw[_HEADER.size + _DIMS.size:]
    if len(body) != rows * cols * 16:
        raise ContractError(f"{path}: expected {rows * cols * 16} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(rows, cols).astype(np.complex128)


def read_real_matrix(path) -> np.ndarray:
    return read_matrix(path).real.copy()


def write_csv(path, values, part: str = "real", fmt: str = "%.6g") -> Path:
    """Lossy text export for inspection (one matrix row per line)."""
    arr = np.asarray(values)
    parts = {"real": np.real, "imag": np.imag, "abs": np.abs, "angle": np.angle}
    if part not in parts:
        raise ContractError(f"part must be one of {sorted(parts)}")
    np.savetxt(path, parts[part](arr), delimiter=",", fmt=fmt)
    return Path(path)


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise MissingDataError(f"metadata file not found: {path}")
    return json.loads(path.read_text())
