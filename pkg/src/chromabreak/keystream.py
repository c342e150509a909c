"""Key schedule: each pseudo-random quantity the cipher uses, derived from a :class:`SecretKey`.

All chaotic iteration is IEEE-754 binary64 with the logistic step evaluated as
``(mu * x) * (1 - x)``; the derived tables are therefore reproducible bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import DegenerateOrbitError, DimensionMismatchError
from .image import ByteArray, Dims, check_dims
from .models.keys import SecretKey

logger = logging.getLogger(__name__)

ChaoticSequence = npt.NDArray[np.float64]
RankPermutation = npt.NDArray[np.int64]
ByteKeystream = ByteArray

# 10**14 is exact in binary64 and x * 1e14 < 2**53 for x in (0, 1), so the floor is exact.
_SCALE = 1e14


def iterate_logistic(x: float, mu: float, n: int) -> float:
    """Apply ``f(x) = mu * x * (1 - x)`` ``n`` times.

    The value fed into every step must lie strictly inside ``(0, 1)``; the final result is
    returned as computed, so ``iterate_logistic(0.5, 4.0, 1) == 1.0`` while a second step
    raises :class:`DegenerateOrbitError`.
    """

    if n < 0:
        raise ValueError("iteration count must be non-negative")
    for step in range(n):
        if not 0.0 < x < 1.0:
            raise DegenerateOrbitError(step, x)
        x = (mu * x) * (1.0 - x)
    return x


def generate_states(x0: float, mu: float, burn_in: int, n: int) -> ChaoticSequence:
    """Return ``f^(burn_in+1)(x0), ..., f^(burn_in+n)(x0)``."""

    if n < 1:
        raise ValueError("state count must be at least 1")
    x = iterate_logistic(x0, mu, burn_in)
    states: list[float] = []
    append = states.append
    for offset in range(n):
        if not 0.0 < x < 1.0:
            raise DegenerateOrbitError(burn_in + offset, x)
        x = (mu * x) * (1.0 - x)
        append(x)
    if not 0.0 < x < 1.0:
        raise DegenerateOrbitError(burn_in + n, x)
    return np.array(states, dtype=np.float64)


#: States inspected after burn-in when screening an orbit for periodic behaviour.
SCREEN_STATES = 4096
#: Smallest accepted Lyapunov exponent estimate; periodic attractors have a negative one.
MIN_LYAPUNOV = 0.05


def orbit_is_chaotic(x0: float, mu: float, burn_in: int) -> bool:
    """Whether the orbit after ``burn_in`` steps behaves chaotically.

    The orbit is rejected if it leaves ``(0, 1)`` or revisits a state within
    :data:`SCREEN_STATES` steps. It is also rejected if its Lyapunov exponent, estimated over
    the second half of that window, is below :data:`MIN_LYAPUNOV`. Parameters inside a
    periodic window (for example the period-3 window around ``mu = 3.83``) fail this test.
    """

    try:
        states = generate_states(x0, mu, burn_in, SCREEN_STATES)
    except DegenerateOrbitError:
        return False
    if np.unique(states).size != states.size:
        return False
    tail = states[SCREEN_STATES // 2 :]
    with np.errstate(divide="ignore"):
        exponent = float(np.mean(np.log(np.abs(mu * (1.0 - 2.0 * tail)))))
    return exponent >= MIN_LYAPUNOV


def rank_permutation(states: npt.ArrayLike) -> RankPermutation:
    """Indices of ``states`` ordered from largest to smallest; ties keep index order."""

    values = np.asarray(states, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("rank_permutation needs a non-empty one-dimensional sequence")
    # Negation is exact, so a stable ascending sort of -x is a stable descending sort of x.
    return np.argsort(-values, kind="stable").astype(np.int64)


def is_permutation(values: npt.ArrayLike, size: int) -> bool:
    arr = np.asarray(values)
    if arr.shape != (size,):
        return False
    return bool(np.array_equal(np.sort(arr), np.arange(size)))


def _scaled(states: npt.ArrayLike) -> npt.NDArray[np.uint64]:
    values = np.asarray(states, dtype=np.float64)
    return np.floor(values * _SCALE).astype(np.uint64)


def derive_raw_selector(states: npt.ArrayLike) -> npt.NDArray[np.uint8]:
    """``floor(x * 10**14) mod 3`` element-wise, before balancing."""

    return (_scaled(states) % np.uint64(3)).astype(np.uint8)


def derive_byte_keystream(states: npt.ArrayLike) -> ByteKeystream:
    """``floor(x * 10**14) mod 256`` element-wise."""

    return (_scaled(states) % np.uint64(256)).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class ChannelSelector:
    """Balanced channel selector ``Y``: each of 0, 1, 2 appears exactly ``mn`` times."""

    y: npt.NDArray[np.uint8]
    mn: int

    def __post_init__(self) -> None:
        arr = np.array(self.y, dtype=np.uint8, copy=True)
        if arr.shape != (3 * self.mn,):
            raise DimensionMismatchError("channel selector length", 3 * self.mn, arr.size)
        counts = np.bincount(arr, minlength=3)
        if counts.size != 3 or not np.all(counts == self.mn):
            raise ValueError(f"channel selector is not balanced: counts {counts.tolist()}")
        arr.setflags(write=False)
        object.__setattr__(self, "y", arr)

    def __len__(self) -> int:
        return int(self.y.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelSelector):
            return NotImplemented
        return self.mn == other.mn and bool(np.array_equal(self.y, other.y))

    def __hash__(self) -> int:
        return hash((self.mn, self.y.tobytes()))


def balance_selector(raw: npt.ArrayLike, mn: int) -> ChannelSelector:
    """Rewrite ``raw`` so each symbol occurs ``mn`` times.

    ``raw[0]`` is kept; each later element is rotated to the next symbol whose count over the
    already-rewritten prefix is still below ``mn``.
    """

    values = np.asarray(raw)
    if values.shape != (3 * mn,):
        raise DimensionMismatchError("raw selector length", 3 * mn, values.size)
    if values.size and (values.min() < 0 or values.max() > 2):
        raise ValueError("raw selector values must be in {0, 1, 2}")
    y = [int(v) for v in values.tolist()]
    counts = [0, 0, 0]
    counts[y[0]] += 1
    for index in range(1, len(y)):
        symbol = y[index]
        if counts[symbol] >= mn:
            following = (symbol + 1) % 3
            symbol = following if counts[following] < mn else (symbol + 2) % 3
            y[index] = symbol
        counts[symbol] += 1
    return ChannelSelector(np.array(y, dtype=np.uint8), mn)


@dataclass(frozen=True, eq=False)
class ScanSchedule:
    """Order in which the substitution visits slots: ``coords[l] = (i, j, k)``."""

    coords: npt.NDArray[np.int64]
    dims: Dims

    def __len__(self) -> int:
        return int(self.coords.shape[0])

    @cached_property
    def slots(self) -> npt.NDArray[np.int64]:
        """Linear slot indices ``k*M*N + i*N + j`` in visiting order."""

        m, n = self.dims
        i, j, k = self.coords[:, 0], self.coords[:, 1], self.coords[:, 2]
        return (k * (m * n) + i * n + j).astype(np.int64)


def build_schedule(selector: ChannelSelector, dims: Dims) -> ScanSchedule:
    """Fill each channel in raster order, one pixel per occurrence of that channel in ``Y``."""

    m, n = check_dims(dims)
    if selector.mn != m * n:
        raise DimensionMismatchError("selector pixel count", m * n, selector.mn)
    y = selector.y.astype(np.int64)
    occurrence = np.empty_like(y)
    for channel in range(3):
        mask = y == channel
        occurrence[mask] = np.arange(int(mask.sum()), dtype=np.int64)
    coords = np.column_stack((occurrence // n, occurrence % n, y))
    coords.setflags(write=False)
    return ScanSchedule(coords, (m, n))


@dataclass(frozen=True, eq=False)
class PermutationTables:
    """Row table ``t`` (length 3M) and per-row column tables ``tstar`` (M x 3N)."""

    t: RankPermutation
    tstar: npt.NDArray[np.int64]

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=np.int64, copy=True)
        tstar = np.array(self.tstar, dtype=np.int64, copy=True)
        if t.ndim != 1 or t.size % 3 or not is_permutation(t, t.size):
            raise ValueError("row table must be a permutation of 0..3M-1")
        m = t.size // 3
        if tstar.ndim != 2 or tstar.shape[0] != m or tstar.shape[1] % 3:
            raise DimensionMismatchError("column tables shape", f"({m}, 3N)", tstar.shape)
        expected = np.arange(tstar.shape[1])
        if not np.all(np.sort(tstar, axis=1) == expected):
            raise ValueError("every column table must be a permutation of 0..3N-1")
        t.setflags(write=False)
        tstar.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "tstar", tstar)

    @property
    def dims(self) -> Dims:
        return int(self.tstar.shape[0]), int(self.tstar.shape[1] // 3)


class KeyMaterial(NamedTuple):
    tables: PermutationTables
    selector: ChannelSelector
    z: ByteKeystream
    schedule: ScanSchedule


def derive_all(key: SecretKey, dims: Dims) -> KeyMaterial:
    """Run the full initialization procedure for an ``M x N`` image."""

    m, n = check_dims(dims)
    row_states = generate_states(key.x0, key.mu0, key.m1, 3 * m)
    t = rank_permutation(row_states)

    states = generate_states(key.x0s, key.mu0s, key.m2, 3 * m * n)
    tstar = np.stack([rank_permutation(block) for block in states.reshape(m, 3 * n)])

    selector = balance_selector(derive_raw_selector(states), m * n)
    z = derive_byte_keystream(states)
    z.setflags(write=False)
    schedule = build_schedule(selector, (m, n))
    logger.debug("Derived key material for %dx%d image (%d slots)", m, n, 3 * m * n)
    return KeyMaterial(PermutationTables(t, tstar), selector, z, schedule)


__all__ = [
    "MIN_LYAPUNOV",
    "SCREEN_STATES",
    "ByteKeystream",
    "ChannelSelector",
    "ChaoticSequence",
    "KeyMaterial",
    "PermutationTables",
    "RankPermutation",
    "ScanSchedule",
    "balance_selector",
    "build_schedule",
    "derive_all",
    "derive_byte_keystream",
    "derive_raw_selector",
    "generate_states",
    "is_permutation",
    "iterate_logistic",
    "orbit_is_chaotic",
    "rank_permutation",
]
