from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

StageName = Literal["selector", "keystream", "permutation"]
StageStatus = Literal["ok", "failed", "skipped"]


class StageRecord(BaseModel):
    """Outcome and wall-clock time of one attack stage."""

    name: StageName
    status: StageStatus = "ok"
    seconds: float = 0.0

    model_config = ConfigDict(extra="forbid")


class VerificationResult(BaseModel):
    """Break of an independently encrypted image, compared byte for byte."""

    source: str
    differing_bytes: int
    total_bytes: int

    @property
    def exact(self) -> bool:
        return self.differing_bytes == 0

    model_config = ConfigDict(extra="forbid")


class AttackReport(BaseModel):
    """Summary written by ``cbx attack``."""

    dims: tuple[int, int]
    query_count: int = 0
    expected_queries: int
    d1: int
    d2: int
    d: int
    period: int
    success: bool = False
    stages: list[StageRecord] = Field(default_factory=list)
    ambiguity_steps: list[int] = Field(default_factory=list)
    outputs: dict[str, str] = Field(default_factory=dict)
    verification: VerificationResult | None = None
    error: str | None = None

    model_config = ConfigDict(extra="forbid")


__all__ = ["AttackReport", "StageName", "StageRecord", "StageStatus", "VerificationResult"]
