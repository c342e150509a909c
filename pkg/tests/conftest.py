from __future__ import annotations

import sys
from collections.abc import Callable, Iterator
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

# Ensure the repository-local ``src`` directory is importable when the project is
# not installed as a package.
SRC_PATH = Path(__file__).resolve().parents[1] / "src"
if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))

from chromabreak.config import get_settings  # noqa: E402
from chromabreak.image import ColourImage, Dims  # noqa: E402


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Drop cached settings so each test sees its own ``CHROMABREAK_*`` environment."""

    for name in ("D1", "D2", "RETRY_D1", "RETRY_D2", "LOG_LEVEL", "DEBUG"):
        monkeypatch.delenv(f"CHROMABREAK_{name}", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240229)


@pytest.fixture
def cli_runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def random_image(rng: np.random.Generator) -> Callable[[Dims], ColourImage]:
    def make(dims: Dims) -> ColourImage:
        m, n = dims
        return ColourImage(rng.integers(0, 256, size=(3, m, n), dtype=np.uint8))

    return make
