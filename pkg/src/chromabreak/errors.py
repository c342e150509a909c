from __future__ import annotations

from collections.abc import Sequence


class ChromaBreakError(Exception):
    """Base error for chromabreak."""


class DegenerateOrbitError(ChromaBreakError):
    """A logistic orbit left the open interval (0, 1)."""

    def __init__(self, step: int, value: float) -> None:
        super().__init__(
            f"Logistic orbit degenerated at step {step}: value {value!r} is outside (0, 1)"
        )
        self.step = step
        self.value = value


class DimensionMismatchError(ChromaBreakError):
    def __init__(self, what: str, expected: object, actual: object) -> None:
        super().__init__(f"{what}: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class InvalidDifferenceError(ChromaBreakError):
    def __init__(self, d: int, reason: str) -> None:
        super().__init__(f"Unusable difference D={d}: {reason}")
        self.d = d


class AmbiguousChannelError(ChromaBreakError):
    """More than one (or no) channel matches the expected difference at ``step``."""

    def __init__(
        self, step: int, candidates: Sequence[int], *, previous_steps: Sequence[int] = ()
    ) -> None:
        listed = ", ".join(str(k) for k in candidates) or "none"
        super().__init__(f"Channel selector is ambiguous at step {step} (candidates: {listed})")
        self.step = step
        self.candidates = tuple(candidates)
        self.steps = (*previous_steps, step)


class NotABijectionError(ChromaBreakError):
    def __init__(self, missing: int, duplicated: int) -> None:
        super().__init__(
            f"Decoded position map is not a permutation ({missing} slots missing, "
            f"{duplicated} slots decoded more than once)"
        )
        self.missing = missing
        self.duplicated = duplicated


class ImageFormatError(ChromaBreakError):
    """Base error for PPM decoding problems."""


class MalformedHeaderError(ImageFormatError):
    pass


class UnsupportedMaxvalError(ImageFormatError):
    def __init__(self, maxval: int) -> None:
        super().__init__(f"Unsupported PPM maxval {maxval}; only 255 is accepted")
        self.maxval = maxval


class TruncatedPayloadError(ImageFormatError):
    def __init__(self, expected: int, actual: int) -> None:
        super().__init__(f"PPM payload truncated: expected {expected} bytes, found {actual}")
        self.expected = expected
        self.actual = actual


class KeyFileError(ChromaBreakError):
    def __init__(self, message: str, *, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class EquivalentKeyFormatError(ChromaBreakError):
    pass
