"""Binary PPM (P6, maxval 255) codec and chosen-plaintext constructors."""

from __future__ import annotations

import logging
import os
from pathlib import Path

import numpy as np

from .errors import MalformedHeaderError, TruncatedPayloadError, UnsupportedMaxvalError
from .image import ColourImage, Dims, check_dims
from .utils.files import write_bytes_atomic

logger = logging.getLogger(__name__)

PPM_MAGIC = b"P6"
_WHITESPACE = b" \t\n\r\v\f"
_COMMENT = ord("#")


def _header_tokens(data: bytes) -> tuple[list[bytes], int]:
    """Return the four header tokens and the offset of the first payload byte."""

    tokens: list[bytes] = []
    pos = 0
    size = len(data)
    while len(tokens) < 4:
        if pos >= size:
            raise MalformedHeaderError("PPM header ended before magic, width, height and maxval")
        byte = data[pos]
        if byte in _WHITESPACE:
            pos += 1
        elif byte == _COMMENT:
            while pos < size and data[pos] not in b"\r\n":
                pos += 1
        else:
            start = pos
            while pos < size and data[pos] not in _WHITESPACE and data[pos] != _COMMENT:
                pos += 1
            tokens.append(data[start:pos])
    # A comment may sit between maxval and the whitespace byte that ends the header.
    if pos < size and data[pos] == _COMMENT:
        while pos < size and data[pos] not in b"\r\n":
            pos += 1
    # Exactly one whitespace byte separates maxval from the raster.
    if pos >= size or data[pos] not in _WHITESPACE:
        raise MalformedHeaderError("PPM maxval must be followed by a single whitespace byte")
    return tokens, pos + 1


def _positive_int(token: bytes, name: str) -> int:
    if not token.isdigit():
        raise MalformedHeaderError(f"PPM {name} is not a decimal integer: {token!r}")
    value = int(token)
    if value < 1:
        raise MalformedHeaderError(f"PPM {name} must be positive, got {value}")
    return value


def read_ppm(data: bytes) -> ColourImage:
    """Decode a binary P6 file into the channel-major :class:`ColourImage` layout."""

    tokens, offset = _header_tokens(data)
    magic, width_raw, height_raw, maxval_raw = tokens
    if magic != PPM_MAGIC:
        raise MalformedHeaderError(f"Not a binary PPM: magic {magic!r}")
    width = _positive_int(width_raw, "width")
    height = _positive_int(height_raw, "height")
    maxval = _positive_int(maxval_raw, "maxval")
    if maxval != 255:
        raise UnsupportedMaxvalError(maxval)

    expected = width * height * 3
    payload = data[offset : offset + expected]
    if len(payload) < expected:
        raise TruncatedPayloadError(expected, len(payload))
    trailing = len(data) - offset - expected
    if trailing:
        logger.debug("Ignoring %d trailing bytes after PPM raster", trailing)
    rgb = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ColourImage.from_interleaved(rgb)


def write_ppm(img: ColourImage) -> bytes:
    """Encode ``img`` with the canonical header ``P6\\n<w> <h>\\n255\\n``."""

    header = f"P6\n{img.n} {img.m}\n255\n".encode("ascii")
    return header + img.to_interleaved().tobytes()


def load_ppm(path: str | os.PathLike[str]) -> ColourImage:
    return read_ppm(Path(path).read_bytes())


def save_ppm(path: str | os.PathLike[str], img: ColourImage) -> Path:
    return write_bytes_atomic(path, write_ppm(img))


def solid_image(dims: Dims, value: int) -> ColourImage:
    """Image whose every slot holds ``value``."""

    m, n = check_dims(dims)
    if not 0 <= value <= 255:
        raise ValueError(f"pixel value must be a byte, got {value}")
    return ColourImage(np.full((3, m, n), value, dtype=np.uint8))


__all__ = ["PPM_MAGIC", "load_ppm", "read_ppm", "save_ppm", "solid_image", "write_ppm"]
