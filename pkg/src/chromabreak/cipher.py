"""The attacked cipher: row permutation, column permutation and feedback substitution.

Every stage materialises its output image so the attack can peel stages off one at a time.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from .errors import DimensionMismatchError
from .image import ColourImage
from .keystream import (
    KeyMaterial,
    PermutationTables,
    RankPermutation,
    ScanSchedule,
    derive_all,
)
from .models.keys import SecretKey

logger = logging.getLogger(__name__)


def _row_table(img: ColourImage, t: npt.ArrayLike) -> npt.NDArray[np.int64]:
    table = np.asarray(t, dtype=np.int64)
    if table.shape != (3 * img.m,):
        raise DimensionMismatchError("row table length", 3 * img.m, table.size)
    return table


def _column_tables(
    img: ColourImage, tstar: npt.ArrayLike | Sequence[RankPermutation]
) -> npt.NDArray[np.int64]:
    tables = np.asarray(tstar, dtype=np.int64)
    if tables.shape != (img.m, 3 * img.n):
        raise DimensionMismatchError("column tables shape", (img.m, 3 * img.n), tables.shape)
    return tables


def row_permute(img: ColourImage, t: npt.ArrayLike) -> ColourImage:
    """``out(i, j, k) = in(t[kM+i] mod M, j, t[kM+i] div M)``."""

    table = _row_table(img, t)
    # Channel-major storage makes row r = k*M + i of the (3M, N) view the (i, k) scanline.
    rows = img.data.reshape(3 * img.m, img.n)
    return ColourImage(rows[table].reshape(3, img.m, img.n))


def row_unpermute(img: ColourImage, t: npt.ArrayLike) -> ColourImage:
    table = _row_table(img, t)
    rows = img.data.reshape(3 * img.m, img.n)
    out = np.empty_like(rows)
    out[table] = rows
    return ColourImage(out.reshape(3, img.m, img.n))


def _row_vectors(img: ColourImage) -> npt.NDArray[np.uint8]:
    # (M, 3N) view where entry (i, k*N + j) is pixel (i, j, k).
    return np.transpose(img.data, (1, 0, 2)).reshape(img.m, 3 * img.n)


def _from_row_vectors(vectors: npt.NDArray[np.uint8], m: int, n: int) -> ColourImage:
    return ColourImage(np.transpose(vectors.reshape(m, 3, n), (1, 0, 2)))


def column_permute(
    img: ColourImage, tstar: npt.ArrayLike | Sequence[RankPermutation]
) -> ColourImage:
    """``out(i, j, k) = in(i, tstar[i][kN+j] mod N, tstar[i][kN+j] div N)``."""

    tables = _column_tables(img, tstar)
    permuted = np.take_along_axis(_row_vectors(img), tables, axis=1)
    return _from_row_vectors(permuted, img.m, img.n)


def column_unpermute(
    img: ColourImage, tstar: npt.ArrayLike | Sequence[RankPermutation]
) -> ColourImage:
    tables = _column_tables(img, tstar)
    out = np.empty((img.m, 3 * img.n), dtype=np.uint8)
    np.put_along_axis(out, tables, _row_vectors(img), axis=1)
    return _from_row_vectors(out, img.m, img.n)


def _check_substitution_inputs(
    img: ColourImage, sched: ScanSchedule, z: npt.ArrayLike
) -> npt.NDArray[np.int64]:
    stream = np.asarray(z, dtype=np.int64)
    if sched.dims != img.dims:
        raise DimensionMismatchError("schedule dimensions", img.dims, sched.dims)
    if len(sched) != img.size or stream.shape != (img.size,):
        raise DimensionMismatchError("keystream length", img.size, stream.size)
    return stream


def substitute(img: ColourImage, sched: ScanSchedule, z: npt.ArrayLike) -> ColourImage:
    """Feedback substitution along the scan schedule.

    ``c[0] = p[0] + z[0]`` and ``c[l] = p[l] + p[l-1] + c[l-1] + z[l]`` (mod 256), where
    ``p[l]``/``c[l]`` are the plain/cipher bytes at ``sched[l]``. The recurrence is a running
    sum, so it is evaluated as one cumulative sum.
    """

    stream = _check_substitution_inputs(img, sched, z)
    slots = sched.slots
    plain = img.flat()[slots].astype(np.int64)
    step = plain + stream
    step[1:] += plain[:-1]
    cipher = np.cumsum(step) % 256
    out = np.empty(img.size, dtype=np.uint8)
    out[slots] = cipher
    return ColourImage.from_flat(out, img.dims)


def unsubstitute(img: ColourImage, sched: ScanSchedule, z: npt.ArrayLike) -> ColourImage:
    """Inverse of :func:`substitute`.

    With ``a[l] = c[l] - c[l-1] - z[l]`` the plain bytes satisfy ``p[l] = a[l] - p[l-1]``,
    an alternating running sum.
    """

    stream = _check_substitution_inputs(img, sched, z)
    slots = sched.slots
    cipher = img.flat()[slots].astype(np.int64)
    a = cipher - stream
    a[1:] -= cipher[:-1]
    sign = np.where(np.arange(a.size) % 2 == 0, 1, -1)
    plain = (sign * np.cumsum(sign * (a % 256))) % 256
    out = np.empty(img.size, dtype=np.uint8)
    out[slots] = plain
    return ColourImage.from_flat(out, img.dims)


def encrypt_with(img: ColourImage, material: KeyMaterial) -> ColourImage:
    """Encrypt using pre-derived key material (avoids re-running the key schedule)."""

    tables = material.tables
    if tables.dims != img.dims:
        raise DimensionMismatchError("key material dimensions", img.dims, tables.dims)
    permuted = column_permute(row_permute(img, tables.t), tables.tstar)
    return substitute(permuted, material.schedule, material.z)


def decrypt_with(img: ColourImage, material: KeyMaterial) -> ColourImage:
    tables = material.tables
    if tables.dims != img.dims:
        raise DimensionMismatchError("key material dimensions", img.dims, tables.dims)
    stripped = unsubstitute(img, material.schedule, material.z)
    return row_unpermute(column_unpermute(stripped, tables.tstar), tables.t)


def encrypt(img: ColourImage, key: SecretKey) -> ColourImage:
    logger.debug("Encrypting %dx%d image", img.m, img.n)
    return encrypt_with(img, derive_all(key, img.dims))


def decrypt(img: ColourImage, key: SecretKey) -> ColourImage:
    logger.debug("Decrypting %dx%d image", img.m, img.n)
    return decrypt_with(img, derive_all(key, img.dims))


__all__ = [
    "PermutationTables",
    "column_permute",
    "column_unpermute",
    "decrypt",
    "decrypt_with",
    "encrypt",
    "encrypt_with",
    "row_permute",
    "row_unpermute",
    "substitute",
    "unsubstitute",
]
