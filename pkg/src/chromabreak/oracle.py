"""Chosen-plaintext oracles: the only channel through which the attack sees the cipher."""

from __future__ import annotations

import logging
from typing import Protocol, runtime_checkable

from .cipher import encrypt_with
from .image import ColourImage, Dims, check_dims, require_dims
from .keystream import derive_all
from .models.keys import SecretKey

logger = logging.getLogger(__name__)


@runtime_checkable
class EncryptionOracle(Protocol):
    """Answers encryption queries under one fixed, hidden key."""

    @property
    def dims(self) -> Dims: ...

    def query(self, plain: ColourImage) -> ColourImage: ...


class KeyedOracle:
    """In-process oracle holding the secret key; key material is derived once."""

    def __init__(self, key: SecretKey, dims: Dims) -> None:
        self._dims = check_dims(dims)
        self._material = derive_all(key, self._dims)

    @property
    def dims(self) -> Dims:
        return self._dims

    def query(self, plain: ColourImage) -> ColourImage:
        require_dims(plain, self._dims)
        return encrypt_with(plain, self._material)


class CountingOracle:
    """Wraps another oracle and counts the queries it forwards."""

    def __init__(self, inner: EncryptionOracle) -> None:
        self.inner = inner
        self.queries = 0

    @property
    def dims(self) -> Dims:
        return self.inner.dims

    def query(self, plain: ColourImage) -> ColourImage:
        self.queries += 1
        logger.debug("Oracle query #%d", self.queries)
        return self.inner.query(plain)


__all__ = ["CountingOracle", "EncryptionOracle", "KeyedOracle"]
