from __future__ import annotations

import hashlib
import itertools

import numpy as np
import pytest

from chromabreak.errors import DegenerateOrbitError, DimensionMismatchError
from chromabreak.keyfile import REFERENCE_KEY, generate_key
from chromabreak.keystream import (
    ChannelSelector,
    balance_selector,
    build_schedule,
    derive_all,
    derive_byte_keystream,
    derive_raw_selector,
    generate_states,
    is_permutation,
    iterate_logistic,
    orbit_is_chaotic,
    rank_permutation,
)

# SHA-256 over the key material of REFERENCE_KEY (t, tstar, y, z, slots as little-endian i8).
MATERIAL_DIGEST_8X16 = "c462dc9e9180140a1788b7fa40163fe5f0e8f613a8e8fdc1cb5154a7e372fe23"
MATERIAL_DIGEST_512X512 = "f463115c3c826c8df94288923a1a9937c60dc917805352897b56bf477ad2db1b"


def _reference_orbit(x: float, mu: float, burn_in: int, n: int) -> list[float]:
    # Plain binary64 loop kept independent of the vectorised key schedule.
    for _ in range(burn_in):
        x = mu * x * (1.0 - x)
    states = []
    for _ in range(n):
        x = mu * x * (1.0 - x)
        states.append(x)
    return states


def test_iterate_logistic_reaches_one_then_degenerates() -> None:
    assert iterate_logistic(0.5, 4.0, 1) == 1.0
    with pytest.raises(DegenerateOrbitError) as excinfo:
        iterate_logistic(0.5, 4.0, 2)
    assert excinfo.value.step == 1
    assert excinfo.value.value == 1.0


def test_iterate_logistic_fixed_point() -> None:
    assert iterate_logistic(0.75, 4.0, 17) == 0.75


def test_iterate_logistic_zero_steps_returns_input() -> None:
    assert iterate_logistic(0.3, 3.9, 0) == 0.3


def test_iterate_logistic_rejects_negative_count() -> None:
    with pytest.raises(ValueError):
        iterate_logistic(0.3, 3.9, -1)


def test_iterate_logistic_matches_reference_loop() -> None:
    expected = _reference_orbit(REFERENCE_KEY.x0, 4.0, 999, 1)[0]
    result = iterate_logistic(REFERENCE_KEY.x0, 4.0, 1000)
    assert result.hex() == expected.hex()


def test_generate_states_fixed_point() -> None:
    assert generate_states(0.75, 4.0, 5, 3).tolist() == [0.75, 0.75, 0.75]


def test_generate_states_zero_burn_in() -> None:
    x0, mu = 0.3, 3.8
    assert generate_states(x0, mu, 0, 1).tolist() == [(mu * x0) * (1.0 - x0)]


def test_generate_states_matches_reference_loop() -> None:
    states = generate_states(REFERENCE_KEY.x0, REFERENCE_KEY.mu0, 1000, 6)
    expected = _reference_orbit(REFERENCE_KEY.x0, REFERENCE_KEY.mu0, 1000, 6)
    assert [value.hex() for value in states.tolist()] == [value.hex() for value in expected]


def test_generate_states_rejects_degenerate_emitted_state() -> None:
    with pytest.raises(DegenerateOrbitError):
        generate_states(0.5, 4.0, 0, 1)


def test_generate_states_rejects_empty_request() -> None:
    with pytest.raises(ValueError):
        generate_states(0.3, 3.9, 10, 0)


def test_rank_permutation_orders_descending() -> None:
    assert rank_permutation([0.3, 0.9, 0.1]).tolist() == [1, 0, 2]


def test_rank_permutation_breaks_ties_by_index() -> None:
    assert rank_permutation([0.5, 0.5, 0.2]).tolist() == [0, 1, 2]


def test_rank_permutation_reverses_increasing_sequence() -> None:
    values = np.linspace(0.1, 0.9, 7)
    assert rank_permutation(values).tolist() == [6, 5, 4, 3, 2, 1, 0]


def test_rank_permutation_rejects_empty_input() -> None:
    with pytest.raises(ValueError):
        rank_permutation([])


def test_raw_selector_and_keystream_examples() -> None:
    assert derive_raw_selector([0.5, 0.25]).tolist() == [2, 1]
    # 0.5e14 and 0.25e14 are both multiples of 2**12.
    assert derive_byte_keystream([0.5, 0.25]).tolist() == [0, 0]
    # 0.6789 is stored just below its decimal value, so the floor lands on ...999.
    assert derive_byte_keystream([0.3333333333333333, 0.6789]).tolist() == [85, 255]
    assert derive_raw_selector([0.3333333333333333, 0.6789]).tolist() == [0, 2]


def test_reference_key_streams_match_reference_loop() -> None:
    states = _reference_orbit(REFERENCE_KEY.x0s, REFERENCE_KEY.mu0s, REFERENCE_KEY.m2, 10)
    scaled = [int(np.floor(value * 1e14)) for value in states]
    generated = generate_states(REFERENCE_KEY.x0s, REFERENCE_KEY.mu0s, REFERENCE_KEY.m2, 10)
    assert derive_raw_selector(generated).tolist() == [value % 3 for value in scaled]
    assert derive_byte_keystream(generated).tolist() == [value % 256 for value in scaled]


@pytest.mark.parametrize(
    ("raw", "mn", "expected"),
    [
        ([0, 0, 0, 1, 2, 2], 2, [0, 0, 1, 1, 2, 2]),
        ([0, 1, 2], 1, [0, 1, 2]),
        ([0, 0, 0, 0, 0, 0], 2, [0, 0, 1, 1, 2, 2]),
        ([2, 2, 2, 2, 2, 2], 2, [2, 2, 0, 0, 1, 1]),
    ],
)
def test_balance_selector_examples(raw: list[int], mn: int, expected: list[int]) -> None:
    assert balance_selector(raw, mn).y.tolist() == expected


def test_balance_selector_prefix_is_stable(rng: np.random.Generator) -> None:
    mn = 40
    raw = rng.integers(0, 3, size=3 * mn)
    baseline = balance_selector(raw, mn).y
    for index in (0, 17, 59, 119):
        changed = raw.copy()
        changed[index] = (changed[index] + 1) % 3
        assert np.array_equal(balance_selector(changed, mn).y[:index], baseline[:index])


def test_balance_selector_rejects_wrong_length() -> None:
    with pytest.raises(DimensionMismatchError):
        balance_selector([0, 1, 2, 0], 1)


def test_channel_selector_rejects_unbalanced_sequence() -> None:
    with pytest.raises(ValueError, match="not balanced"):
        ChannelSelector(np.array([0, 0, 1], dtype=np.uint8), 1)


def test_build_schedule_fills_channels_sequentially() -> None:
    selector = ChannelSelector(np.array([0, 0, 1, 2, 1, 2], dtype=np.uint8), 2)
    schedule = build_schedule(selector, (1, 2))
    assert [tuple(row) for row in schedule.coords.tolist()] == [
        (0, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (0, 0, 2),
        (0, 1, 1),
        (0, 1, 2),
    ]
    assert schedule.slots.tolist() == [0, 1, 2, 4, 3, 5]


def test_build_schedule_single_pixel() -> None:
    schedule = build_schedule(ChannelSelector(np.array([0, 1, 2], dtype=np.uint8), 1), (1, 1))
    assert [tuple(row) for row in schedule.coords.tolist()] == [(0, 0, 0), (0, 0, 1), (0, 0, 2)]


def test_build_schedule_visits_every_slot_once(rng: np.random.Generator) -> None:
    dims = (5, 7)
    selector = balance_selector(rng.integers(0, 3, size=3 * 35), 35)
    schedule = build_schedule(selector, dims)
    assert is_permutation(schedule.slots, 3 * 35)


def test_build_schedule_rejects_mismatched_dims() -> None:
    selector = ChannelSelector(np.array([0, 1, 2], dtype=np.uint8), 1)
    with pytest.raises(DimensionMismatchError):
        build_schedule(selector, (2, 2))


def test_derive_all_single_pixel_shapes() -> None:
    material = derive_all(generate_key(7), (1, 1))
    assert is_permutation(material.tables.t, 3)
    assert material.tables.tstar.shape == (1, 3)
    assert is_permutation(material.tables.tstar[0], 3)
    assert len(material.selector) == 3
    assert material.z.shape == (3,)


def test_derive_all_is_deterministic() -> None:
    first = derive_all(REFERENCE_KEY, (6, 9))
    second = derive_all(REFERENCE_KEY, (6, 9))
    assert np.array_equal(first.tables.t, second.tables.t)
    assert np.array_equal(first.tables.tstar, second.tables.tstar)
    assert first.selector == second.selector
    assert np.array_equal(first.z, second.z)


def test_m1_only_changes_the_row_table() -> None:
    dims = (8, 8)
    base = derive_all(REFERENCE_KEY, dims)
    shifted = derive_all(REFERENCE_KEY.model_copy(update={"m1": REFERENCE_KEY.m1 + 1}), dims)
    assert not np.array_equal(base.tables.t, shifted.tables.t)
    assert np.array_equal(base.tables.tstar, shifted.tables.tstar)
    assert base.selector == shifted.selector
    assert np.array_equal(base.z, shifted.z)


def test_derive_all_uses_the_documented_orbits() -> None:
    m, n = 3, 4
    material = derive_all(REFERENCE_KEY, (m, n))
    rows = generate_states(REFERENCE_KEY.x0, REFERENCE_KEY.mu0, REFERENCE_KEY.m1, 3 * m)
    states = generate_states(REFERENCE_KEY.x0s, REFERENCE_KEY.mu0s, REFERENCE_KEY.m2, 3 * m * n)
    assert material.tables.t.tolist() == rank_permutation(rows).tolist()
    for i in range(m):
        block = states[i * 3 * n : (i + 1) * 3 * n]
        assert material.tables.tstar[i].tolist() == rank_permutation(block).tolist()
    assert material.z.tolist() == derive_byte_keystream(states).tolist()


@pytest.mark.parametrize("seed", range(100))
def test_selector_is_balanced_for_random_keys(seed: int) -> None:
    sizes = [(1, 1), (2, 3), (5, 4), (8, 8), (3, 11)]
    m, n = sizes[seed % len(sizes)]
    material = derive_all(generate_key(seed), (m, n))
    assert np.bincount(material.selector.y, minlength=3).tolist() == [m * n] * 3
    assert is_permutation(material.schedule.slots, 3 * m * n)


def _material_digest(dims: tuple[int, int]) -> str:
    material = derive_all(REFERENCE_KEY, dims)
    digest = hashlib.sha256()
    for part in (
        material.tables.t,
        material.tables.tstar,
        material.selector.y,
        material.z,
        material.schedule.slots,
    ):
        digest.update(np.ascontiguousarray(part, dtype="<i8").tobytes())
    return digest.hexdigest()


def test_iterate_logistic_pinned_vector() -> None:
    assert iterate_logistic(0.123456789764, 4.0, 1000).hex() == "0x1.205b077cb02c1p-1"


def test_derive_all_pinned_digest_small() -> None:
    assert _material_digest((8, 16)) == MATERIAL_DIGEST_8X16


@pytest.mark.slow
def test_derive_all_pinned_digest_published_size() -> None:
    assert _material_digest((512, 512)) == MATERIAL_DIGEST_512X512


@pytest.mark.parametrize(
    ("x0", "mu", "burn_in"),
    [
        (0.2, 3.83, 1000),  # period-3 window
        (0.2, 3.5, 500),  # period 4
        (0.5, 4.0, 10),  # collapses onto 0
    ],
)
def test_orbit_screen_rejects_periodic_and_degenerate_orbits(
    x0: float, mu: float, burn_in: int
) -> None:
    assert not orbit_is_chaotic(x0, mu, burn_in)


def test_orbit_screen_accepts_chaotic_orbits() -> None:
    key = REFERENCE_KEY
    assert orbit_is_chaotic(key.x0, key.mu0, key.m1)
    assert orbit_is_chaotic(key.x0s, key.mu0s, key.m2)
    assert orbit_is_chaotic(0.3, 3.9, 700)


@pytest.mark.parametrize("seed", range(20))
def test_generated_keys_have_chaotic_orbits(seed: int) -> None:
    key = generate_key(seed)
    assert orbit_is_chaotic(key.x0, key.mu0, key.m1)
    assert orbit_is_chaotic(key.x0s, key.mu0s, key.m2)


def test_rank_permutation_is_a_bijection(rng: np.random.Generator) -> None:
    for _ in range(200):
        size = int(rng.integers(1, 60))
        values = rng.random(size)
        if rng.random() < 0.5:
            # Coarse rounding forces plenty of ties.
            values = np.round(values, 1)
        ranks = rank_permutation(values)
        assert is_permutation(ranks, size)
        ordered = values[ranks]
        assert np.all(ordered[:-1] >= ordered[1:])
        for first, second in zip(ranks[:-1], ranks[1:], strict=True):
            if values[first] == values[second]:
                assert first < second


def _check_balanced(raw: tuple[int, ...], mn: int) -> None:
    y = balance_selector(list(raw), mn).y
    assert np.bincount(y, minlength=3).tolist() == [mn, mn, mn]
    assert y[0] == raw[0]


@pytest.mark.parametrize("mn", [1, 2, 3])
def test_balance_selector_exhaustive_small(mn: int) -> None:
    for raw in itertools.product(range(3), repeat=3 * mn):
        _check_balanced(raw, mn)


@pytest.mark.slow
def test_balance_selector_exhaustive_twelve_symbols() -> None:
    for raw in itertools.product(range(3), repeat=12):
        _check_balanced(raw, 4)
