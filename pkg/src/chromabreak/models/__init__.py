from .keys import MU_MIN, SecretKey
from .report import AttackReport, StageRecord, VerificationResult

__all__ = ["AttackReport", "MU_MIN", "SecretKey", "StageRecord", "VerificationResult"]
