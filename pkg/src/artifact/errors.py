"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class ArtifactError(Exception):
    """Base class for all library errors."""


class InputError(ArtifactError, ValueError):
    """Malformed input: wrong shapes, mismatched centers, schema violations."""


class AnalyzabilityError(ArtifactError):
    """The curve does not satisfy a mathematical precondition of the analysis.

    Parameters
    ----------
    message : str
        Human readable description.
    stage : str
        Pipeline stage that detected the problem (``flag``, ``complements``, ...).
    """

    def __init__(self, message: str, stage: str = "analysis"):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.detail = message


class JetOrderError(AnalyzabilityError):
    """Jet order too small for the requested computation."""

    def __init__(self, required: int, available: int, stage: str = "order"):
        super().__init__(
            f"analysis requires order ≥ {required}, got order {available}", stage
        )
        self.required = required
        self.available = available


class RankError(AnalyzabilityError):
    """A subspace family does not have constant dimension near the center."""
