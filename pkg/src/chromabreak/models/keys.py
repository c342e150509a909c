from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

#: Lower edge of the chaotic regime of the logistic map.
MU_MIN = 3.5699456


class SecretKey(BaseModel):
    """The six-component key ``(m1, m2, x0, mu0, x0*, mu0*)`` of the cipher.

    ``mu`` is accepted on ``(3.5699456, 4]``: the published experiment itself uses ``mu0 = 4.0``.
    """

    m1: int = Field(ge=1, description="Burn-in iterations for the row-table orbit")
    x0: float = Field(gt=0.0, lt=1.0)
    mu0: float = Field(gt=MU_MIN, le=4.0)
    m2: int = Field(ge=1, description="Burn-in iterations for the column/substitution orbit")
    x0s: float = Field(gt=0.0, lt=1.0)
    mu0s: float = Field(gt=MU_MIN, le=4.0)

    model_config = ConfigDict(frozen=True, extra="forbid", strict=False)


__all__ = ["MU_MIN", "SecretKey"]
