"""Chosen-plaintext break of the cipher.

Two solid plain-images reveal the channel selector ``Y`` and the byte keystream ``Z``. With the
substitution stripped, the cipher is a position permutation over ``3MN`` slots, which
``ceil(log2(3MN) / 8)`` probe images encoding each slot's index read off directly.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .cipher import unsubstitute
from .errors import (
    AmbiguousChannelError,
    DimensionMismatchError,
    InvalidDifferenceError,
    NotABijectionError,
)
from .image import ColourImage, Dims, check_dims, require_dims
from .imageio import solid_image
from .keystream import (
    ByteKeystream,
    ChannelSelector,
    ScanSchedule,
    build_schedule,
    is_permutation,
)
from .oracle import EncryptionOracle

logger = logging.getLogger(__name__)

StageCallback = Callable[[str, float], None]

VALID_PERIODS = frozenset({1, 2, 4, 8, 16, 32, 64, 128})


def difference_period(d: int) -> int:
    """Least period of ``l -> (2l+1)*d mod 256``, i.e. ``128 / gcd(d, 256)``."""

    residue = d % 256
    if residue == 0:
        raise InvalidDifferenceError(d, "the difference vanishes modulo 256")
    return 128 // math.gcd(residue, 256)


class DifferenceParams(BaseModel):
    """The pair of solid plain-image values and the derived difference ``D`` and period ``T``."""

    d1: int = Field(default=127, ge=0, le=255)
    d2: int = Field(default=0, ge=0, le=255)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_difference(self) -> DifferenceParams:
        residue = (self.d1 - self.d2) % 256
        if residue == 0:
            raise ValueError("d1 and d2 must differ")
        if residue == 128:
            raise ValueError("a difference of 128 has period 1 and cannot locate the selector")
        return self

    @property
    def d(self) -> int:
        return self.d1 - self.d2

    @property
    def period(self) -> int:
        return difference_period(self.d)


@dataclass(frozen=True, eq=False)
class EquivalentKey:
    """Recovered ``(Y^, Z^, posmap)``; decrypts like the secret key without revealing it.

    ``posmap[q]`` is the original slot of the byte found at permuted slot ``q``.
    """

    yhat: ChannelSelector
    zhat: ByteKeystream
    posmap: npt.NDArray[np.int64]
    dims: Dims

    def __post_init__(self) -> None:
        m, n = check_dims(self.dims)
        total = 3 * m * n
        if self.yhat.mn != m * n:
            raise DimensionMismatchError("selector pixel count", m * n, self.yhat.mn)
        zhat = np.array(self.zhat, dtype=np.uint8, copy=True)
        posmap = np.array(self.posmap, dtype=np.int64, copy=True)
        if zhat.shape != (total,):
            raise DimensionMismatchError("keystream length", total, zhat.size)
        if not is_permutation(posmap, total):
            raise NotABijectionError(*_bijection_defects(posmap, total))
        zhat.setflags(write=False)
        posmap.setflags(write=False)
        object.__setattr__(self, "dims", (m, n))
        object.__setattr__(self, "zhat", zhat)
        object.__setattr__(self, "posmap", posmap)

    @cached_property
    def schedule(self) -> ScanSchedule:
        return build_schedule(self.yhat, self.dims)


def _bijection_defects(decoded: npt.NDArray[np.int64], total: int) -> tuple[int, int]:
    in_range = decoded[(decoded >= 0) & (decoded < total)]
    counts = np.bincount(in_range, minlength=total)
    missing = int(np.count_nonzero(counts == 0))
    duplicated = int(np.sum(counts[counts > 1] - 1)) + int(decoded.size - in_range.size)
    return missing, duplicated


def _difference(c1: ColourImage, c2: ColourImage) -> list[int]:
    if c1.dims != c2.dims:
        raise DimensionMismatchError("ciphertext pair dimensions", c1.dims, c2.dims)
    return ((c1.flat().astype(np.int16) - c2.flat()) % 256).tolist()


def recover_selector(
    c1: ColourImage, c2: ColourImage, params: DifferenceParams
) -> ChannelSelector:
    """Recover ``Y`` from the ciphertexts of the solid images ``d1`` and ``d2``.

    The ciphertext difference at the ``l``-th scheduled slot is ``(2l+1)*D mod 256``. At each
    step the selected channel is the unique one, among channels not yet holding ``MN`` slots,
    whose next raster slot carries that difference.
    """

    diff = _difference(c1, c2)
    mn = c1.mn
    total = 3 * mn
    d = params.d % 256
    stride = (2 * d) % 256
    # Next unread slot and end of each channel's block in the flat, channel-major layout.
    heads = [0, mn, 2 * mn]
    ends = [mn, 2 * mn, 3 * mn]
    y = np.empty(total, dtype=np.uint8)
    expected = d
    for step in range(total):
        candidates = [k for k in range(3) if heads[k] < ends[k] and diff[heads[k]] == expected]
        if len(candidates) != 1:
            logger.info("Selector recovery stopped at step %d: candidates %s", step, candidates)
            raise AmbiguousChannelError(step, candidates)
        channel = candidates[0]
        y[step] = channel
        heads[channel] += 1
        expected = (expected + stride) % 256
    return ChannelSelector(y, mn)


def find_aliasing_steps(y: npt.ArrayLike, period: int) -> list[int]:
    """Steps ``l`` at which the difference progression aliases for a known ``Y``.

    Step ``l`` aliases when some channel other than ``Y[l]`` next occurs at ``l + S`` with
    ``S`` a positive multiple of ``period`` and absent from ``Y[l..l+S-1]``; those are exactly
    the steps where :func:`recover_selector` sees more than one candidate.
    """

    if period not in VALID_PERIODS:
        raise ValueError(f"period must be a power of two up to 128, got {period}")
    symbols = np.asarray(y, dtype=np.int64).tolist()
    upcoming = [-1, -1, -1]
    steps: list[int] = []
    for step in range(len(symbols) - 1, -1, -1):
        upcoming[symbols[step]] = step
        for channel in range(3):
            nxt = upcoming[channel]
            if channel != symbols[step] and nxt > step and (nxt - step) % period == 0:
                steps.append(step)
                break
    steps.reverse()
    return steps


def recover_byte_keystream(c1: ColourImage, d1: int, yhat: ChannelSelector) -> ByteKeystream:
    """Solve the substitution equations for ``Z`` given the solid plaintext ``d1``.

    ``z[0] = c[0] - d1`` and ``z[l] = c[l] - 2*d1 - c[l-1]`` along the recovered schedule.
    """

    if yhat.mn != c1.mn:
        raise DimensionMismatchError("selector pixel count", c1.mn, yhat.mn)
    sched = build_schedule(yhat, c1.dims)
    cipher = c1.flat()[sched.slots].astype(np.int64)
    z = cipher - 2 * d1
    z[0] = cipher[0] - d1
    z[1:] -= cipher[:-1]
    return (z % 256).astype(np.uint8)


def probe_count(dims: Dims) -> int:
    """``ceil(log2(3MN) / 8)``, computed without floating point."""

    m, n = check_dims(dims)
    bits = (3 * m * n - 1).bit_length()
    return max(1, -(-bits // 8))


def build_permutation_probes(dims: Dims) -> list[ColourImage]:
    """Probe ``q`` holds byte ``q`` of each slot's own index at that slot."""

    m, n = check_dims(dims)
    index = np.arange(3 * m * n, dtype=np.int64)
    return [
        ColourImage.from_flat((index >> (8 * q)) & 0xFF, (m, n)) for q in range(probe_count(dims))
    ]


def recover_position_map(
    stripped_probes: Sequence[ColourImage], dims: Dims
) -> npt.NDArray[np.int64]:
    """Concatenate the probe bytes at every permuted slot into the original slot index."""

    m, n = check_dims(dims)
    expected = probe_count((m, n))
    if len(stripped_probes) != expected:
        raise DimensionMismatchError("probe count", expected, len(stripped_probes))
    total = 3 * m * n
    decoded = np.zeros(total, dtype=np.int64)
    for q, probe in enumerate(stripped_probes):
        require_dims(probe, (m, n))
        decoded |= probe.flat().astype(np.int64) << (8 * q)
    if not is_permutation(decoded, total):
        raise NotABijectionError(*_bijection_defects(decoded, total))
    return decoded


class _StageClock:
    def __init__(self, on_stage: StageCallback | None) -> None:
        self._on_stage = on_stage
        self._start = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        elapsed = now - self._start
        self._start = now
        logger.info("Attack stage %s finished in %.3fs", name, elapsed)
        if self._on_stage is not None:
            self._on_stage(name, elapsed)


def run_attack(
    oracle: EncryptionOracle,
    params: DifferenceParams | None = None,
    *,
    on_stage: StageCallback | None = None,
) -> EquivalentKey:
    """Recover an equivalent key with ``2 + ceil(log2(3MN)/8)`` oracle queries.

    Args:
        oracle: Chosen-plaintext oracle under the key being attacked.
        params: Solid-image pair; defaults to ``(127, 0)``.
        on_stage: Optional callback receiving ``(stage name, seconds)`` after each stage.

    Raises:
        AmbiguousChannelError: The difference progression aliased; retry with other params.
        NotABijectionError: The probes did not decode to a permutation.
    """

    params = params or DifferenceParams()
    dims = check_dims(oracle.dims)
    clock = _StageClock(on_stage)
    logger.info(
        "Attacking %dx%d oracle with d1=%d d2=%d (T=%d)",
        dims[0],
        dims[1],
        params.d1,
        params.d2,
        params.period,
    )

    c1 = oracle.query(solid_image(dims, params.d1))
    c2 = oracle.query(solid_image(dims, params.d2))
    yhat = recover_selector(c1, c2, params)
    clock.lap("selector")

    zhat = recover_byte_keystream(c1, params.d1, yhat)
    sched = build_schedule(yhat, dims)
    clock.lap("keystream")

    stripped = [
        unsubstitute(oracle.query(probe), sched, zhat) for probe in build_permutation_probes(dims)
    ]
    posmap = recover_position_map(stripped, dims)
    clock.lap("permutation")
    return EquivalentKey(yhat, zhat, posmap, dims)


@dataclass
class AttackOutcome:
    key: EquivalentKey
    params: DifferenceParams
    ambiguity_steps: list[int] = field(default_factory=list)


def run_attack_with_retry(
    oracle: EncryptionOracle,
    primary: DifferenceParams,
    fallback: DifferenceParams,
    *,
    on_stage: StageCallback | None = None,
) -> AttackOutcome:
    """Run :func:`run_attack`, retrying once with ``fallback`` if the selector is ambiguous.

    A second :class:`AmbiguousChannelError` propagates with both steps in its ``steps``.
    """

    try:
        return AttackOutcome(run_attack(oracle, primary, on_stage=on_stage), primary)
    except AmbiguousChannelError as first:
        logger.warning(
            "Ambiguous selector at step %d with d1=%d d2=%d; retrying with d1=%d d2=%d",
            first.step,
            primary.d1,
            primary.d2,
            fallback.d1,
            fallback.d2,
        )
        try:
            key = run_attack(oracle, fallback, on_stage=on_stage)
        except AmbiguousChannelError as second:
            raise AmbiguousChannelError(
                second.step, second.candidates, previous_steps=first.steps
            ) from second
        return AttackOutcome(key, fallback, [first.step])


def break_ciphertext(c: ColourImage, ek: EquivalentKey) -> ColourImage:
    """Decrypt ``c`` with an equivalent key: strip the substitution, then undo the permutation."""

    require_dims(c, ek.dims)
    stripped = unsubstitute(c, ek.schedule, ek.zhat).flat()
    plain = np.empty_like(stripped)
    plain[ek.posmap] = stripped
    return ColourImage.from_flat(plain, ek.dims)


def failure_probability_bound(mn: int, period: int) -> float:
    """Upper bound on the chance that selector recovery aliases somewhere.

    ``sum_{k=1}^{floor(2MN/T)} (3MN - kT) * (2/3)**(kT) / 3``, accumulated in ascending ``k``.
    """

    if mn < 1:
        raise ValueError("pixel count must be positive")
    if period not in VALID_PERIODS:
        raise ValueError(f"period must be a power of two up to 128, got {period}")
    total = 0.0
    for k in range(1, (2 * mn) // period + 1):
        span = k * period
        decay = (2.0 / 3.0) ** span
        if decay == 0.0:
            break  # every later term underflows as well
        total += (3 * mn - span) * (decay * (1.0 / 3.0))
    return total


__all__ = [
    "AttackOutcome",
    "DifferenceParams",
    "EquivalentKey",
    "StageCallback",
    "break_ciphertext",
    "build_permutation_probes",
    "difference_period",
    "failure_probability_bound",
    "find_aliasing_steps",
    "probe_count",
    "recover_byte_keystream",
    "recover_position_map",
    "recover_selector",
    "run_attack",
    "run_attack_with_retry",
]
