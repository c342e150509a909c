"""On-disk format for equivalent keys.

Three files share an 8-byte header (``EKY1`` then ``M`` and ``N`` as little-endian u16):
``yhat.bin`` (one byte per step), ``zhat.bin`` (one byte per step) and ``posmap.bin``
(little-endian u32 per slot).
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .attack import EquivalentKey
from .errors import EquivalentKeyFormatError
from .image import Dims
from .keystream import ChannelSelector
from .utils.files import write_bytes_atomic

MAGIC = b"EKY1"
_HEADER = struct.Struct("<4sHH")
YHAT_FILE = "yhat.bin"
ZHAT_FILE = "zhat.bin"
POSMAP_FILE = "posmap.bin"
_U16_MAX = 0xFFFF


def _header(dims: Dims) -> bytes:
    m, n = dims
    if m > _U16_MAX or n > _U16_MAX:
        raise EquivalentKeyFormatError(f"Dimensions {m}x{n} do not fit the 16-bit header fields")
    return _HEADER.pack(MAGIC, m, n)


def save_equivalent_key(directory: str | os.PathLike[str], ek: EquivalentKey) -> dict[str, Path]:
    target = Path(directory)
    header = _header(ek.dims)
    payloads = {
        YHAT_FILE: ek.yhat.y.astype(np.uint8).tobytes(),
        ZHAT_FILE: ek.zhat.astype(np.uint8).tobytes(),
        POSMAP_FILE: ek.posmap.astype("<u4").tobytes(),
    }
    return {
        name: write_bytes_atomic(target / name, header + body) for name, body in payloads.items()
    }


def _read_part(path: Path, itemsize: int) -> tuple[Dims, bytes]:
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise EquivalentKeyFormatError(f"Equivalent-key file {path} is missing") from None
    if len(raw) < _HEADER.size:
        raise EquivalentKeyFormatError(f"{path.name}: shorter than the 8-byte header")
    magic, m, n = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise EquivalentKeyFormatError(f"{path.name}: bad magic {magic!r}")
    if m < 1 or n < 1:
        raise EquivalentKeyFormatError(f"{path.name}: invalid dimensions {m}x{n}")
    body = raw[_HEADER.size :]
    if len(body) != 3 * m * n * itemsize:
        raise EquivalentKeyFormatError(
            f"{path.name}: expected {3 * m * n * itemsize} payload bytes, found {len(body)}"
        )
    return (m, n), body


def load_equivalent_key(directory: str | os.PathLike[str]) -> EquivalentKey:
    """Read and validate the three equivalent-key files under ``directory``."""

    base = Path(directory)
    dims, yhat_raw = _read_part(base / YHAT_FILE, 1)
    zhat_dims, zhat_raw = _read_part(base / ZHAT_FILE, 1)
    posmap_dims, posmap_raw = _read_part(base / POSMAP_FILE, 4)
    if not dims == zhat_dims == posmap_dims:
        raise EquivalentKeyFormatError(
            f"Equivalent-key files disagree on dimensions: {dims}, {zhat_dims}, {posmap_dims}"
        )
    m, n = dims
    try:
        yhat = ChannelSelector(np.frombuffer(yhat_raw, dtype=np.uint8), m * n)
    except ValueError as exc:
        raise EquivalentKeyFormatError(f"{YHAT_FILE}: {exc}") from exc
    zhat = np.frombuffer(zhat_raw, dtype=np.uint8)
    posmap = np.frombuffer(posmap_raw, dtype="<u4").astype(np.int64)
    return EquivalentKey(yhat, zhat, posmap, dims)


__all__ = [
    "MAGIC",
    "POSMAP_FILE",
    "YHAT_FILE",
    "ZHAT_FILE",
    "load_equivalent_key",
    "save_equivalent_key",
]
