"""Environment-driven defaults (``CHROMABREAK_*`` variables)."""

from __future__ import annotations

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .attack import DifferenceParams


class Settings(BaseSettings):
    """Defaults for the attack and for CLI diagnostics; CLI flags take precedence."""

    d1: int = Field(default=127, ge=0, le=255)
    d2: int = Field(default=0, ge=0, le=255)
    retry_d1: int = Field(default=63, ge=0, le=255)
    retry_d2: int = Field(default=0, ge=0, le=255)
    log_level: str = "WARNING"
    debug: bool = False

    model_config = SettingsConfigDict(env_prefix="CHROMABREAK_", extra="ignore")

    def primary_params(self, d1: int | None = None, d2: int | None = None) -> DifferenceParams:
        return DifferenceParams(
            d1=self.d1 if d1 is None else d1,
            d2=self.d2 if d2 is None else d2,
        )

    def fallback_params(self) -> DifferenceParams:
        return DifferenceParams(d1=self.retry_d1, d2=self.retry_d2)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()


__all__ = ["Settings", "get_settings"]
