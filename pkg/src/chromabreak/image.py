"""The M x N x 3 byte volume shared by the cipher, the attack and the PPM codec."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import DimensionMismatchError

Dims = tuple[int, int]
ByteArray = npt.NDArray[np.uint8]


def check_dims(dims: Dims) -> Dims:
    m, n = int(dims[0]), int(dims[1])
    if m < 1 or n < 1:
        raise ValueError(f"Image dimensions must be positive, got {m}x{n}")
    return m, n


@dataclass(frozen=True, eq=False)
class ColourImage:
    """Immutable colour image stored channel-major as ``data[k, i, j]``.

    Flattening gives the canonical linear slot index ``p = k*M*N + i*N + j``.
    """

    data: ByteArray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.uint8, copy=True)
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise DimensionMismatchError("image volume shape", "(3, M, N)", arr.shape)
        check_dims((arr.shape[1], arr.shape[2]))
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def m(self) -> int:
        return int(self.data.shape[1])

    @property
    def n(self) -> int:
        return int(self.data.shape[2])

    @property
    def dims(self) -> Dims:
        return self.m, self.n

    @property
    def mn(self) -> int:
        return self.m * self.n

    @property
    def size(self) -> int:
        return 3 * self.mn

    def flat(self) -> ByteArray:
        """Return a read-only view in linear slot order."""

        return self.data.reshape(-1)

    def pixel(self, i: int, j: int, k: int) -> int:
        return int(self.data[k, i, j])

    @classmethod
    def from_flat(cls, values: npt.ArrayLike, dims: Dims) -> ColourImage:
        m, n = check_dims(dims)
        arr = np.asarray(values, dtype=np.int64)
        if arr.size != 3 * m * n:
            raise DimensionMismatchError("slot count", 3 * m * n, arr.size)
        return cls(np.mod(arr, 256).astype(np.uint8).reshape(3, m, n))

    @classmethod
    def from_interleaved(cls, rgb: npt.ArrayLike) -> ColourImage:
        """Build from an ``(M, N, 3)`` array as produced by most image libraries."""

        arr = np.asarray(rgb, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DimensionMismatchError("interleaved image shape", "(M, N, 3)", arr.shape)
        return cls(np.transpose(arr, (2, 0, 1)))

    def to_interleaved(self) -> ByteArray:
        return np.ascontiguousarray(np.transpose(self.data, (1, 2, 0)))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ColourImage):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.dims, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"ColourImage(m={self.m}, n={self.n})"


def require_dims(img: ColourImage, dims: Dims) -> None:
    if img.dims != tuple(dims):
        raise DimensionMismatchError("image dimensions", tuple(dims), img.dims)


__all__ = ["ByteArray", "ColourImage", "Dims", "check_dims", "require_dims"]
