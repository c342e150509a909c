"""Text key files: one ``name=value`` line per key component."""

from __future__ import annotations

import logging
import os
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from .errors import KeyFileError
from .keystream import orbit_is_chaotic
from .models.keys import SecretKey
from .utils.files import write_text_atomic

logger = logging.getLogger(__name__)

KEY_FIELDS: tuple[str, ...] = ("m1", "x0", "mu0", "m2", "x0s", "mu0s")
_INTEGER_FIELDS = frozenset({"m1", "m2"})

#: Key of the published 512x512 experiment.
REFERENCE_KEY = SecretKey(
    m1=1000,
    x0=0.123456789764,
    mu0=4.0,
    m2=2000,
    x0s=0.567891234567,
    mu0s=3.999999,
)


def _convert(name: str, raw: str) -> int | float:
    try:
        return int(raw) if name in _INTEGER_FIELDS else float(raw)
    except ValueError:
        kind = "an unsigned integer" if name in _INTEGER_FIELDS else "a decimal number"
        raise KeyFileError(f"Key field '{name}' must be {kind}, got {raw!r}", field=name) from None


def parse_key(text: str) -> SecretKey:
    """Parse key-file text; blank lines and ``#`` comments are ignored."""

    values: dict[str, int | float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        name, sep, raw = stripped.partition("=")
        name = name.strip()
        if not sep:
            raise KeyFileError(f"Line {lineno} is not of the form name=value")
        if name not in KEY_FIELDS:
            raise KeyFileError(f"Unknown key field '{name}' on line {lineno}", field=name)
        if name in values:
            raise KeyFileError(f"Key field '{name}' appears more than once", field=name)
        values[name] = _convert(name, raw.strip())

    for name in KEY_FIELDS:
        if name not in values:
            raise KeyFileError(f"Key file is missing field '{name}'", field=name)

    try:
        return SecretKey.model_validate(values)
    except ValidationError as exc:
        first = exc.errors()[0]
        name = str(first["loc"][0]) if first.get("loc") else None
        raise KeyFileError(
            f"Key field '{name}' is out of range: {first['msg']}", field=name
        ) from exc


def format_key(key: SecretKey) -> str:
    lines = []
    for name in KEY_FIELDS:
        value = getattr(key, name)
        lines.append(f"{name}={value}" if name in _INTEGER_FIELDS else f"{name}={float(value)!r}")
    return "\n".join(lines) + "\n"


def load_key(path: str | os.PathLike[str]) -> SecretKey:
    return parse_key(Path(path).read_text(encoding="utf-8"))


def save_key(path: str | os.PathLike[str], key: SecretKey) -> Path:
    return write_text_atomic(path, format_key(key))


def _chaotic_orbit(rng: np.random.Generator, burn_in: int) -> tuple[float, float]:
    while True:
        x0 = float(rng.uniform(0.01, 0.99))
        mu = float(rng.uniform(3.57, 4.0))
        if orbit_is_chaotic(x0, mu, burn_in):
            return x0, mu
        logger.debug("Redrawing orbit parameters: mu=%r lies in a periodic window", mu)


def generate_key(seed: int | None = None) -> SecretKey:
    """Random valid key; deterministic when ``seed`` is given.

    ``x0, x0*`` are uniform on (0.01, 0.99), ``mu0, mu0*`` on [3.57, 4) and ``m1, m2`` on
    [500, 5000]. A pair ``(x0, mu0)`` is redrawn until its orbit passes
    :func:`~chromabreak.keystream.orbit_is_chaotic`, so periodic windows never reach the
    key schedule.
    """

    rng = np.random.default_rng(seed)
    if seed is None:
        logger.debug("Generating key from fresh OS entropy")
    m1 = int(rng.integers(500, 5001))
    x0, mu0 = _chaotic_orbit(rng, m1)
    m2 = int(rng.integers(500, 5001))
    x0s, mu0s = _chaotic_orbit(rng, m2)
    return SecretKey(m1=m1, x0=x0, mu0=mu0, m2=m2, x0s=x0s, mu0s=mu0s)


__all__ = [
    "KEY_FIELDS",
    "REFERENCE_KEY",
    "format_key",
    "generate_key",
    "load_key",
    "parse_key",
    "save_key",
]
