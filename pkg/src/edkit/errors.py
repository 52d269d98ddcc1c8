"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class EDKitError(Exception):
    """Base class for all toolkit errors."""


class EmptyTitleError(EDKitError):
    """Title normalizes to the empty string."""


class CorruptStreamError(EDKitError):
    """Compressed dump stream cannot be decoded."""


class DatasetParseError(EDKitError):
    """Dataset file violates its declared format."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InvalidSpanError(EDKitError):
    """Mention offsets violate span invariants."""


class MissingGoldError(EDKitError):
    """Operation requires a gold entity that is absent."""


class TokenizerRoundTripError(EDKitError):
    """decode(encode(s)) != s for a candidate surface."""

    def __init__(self, surface: str, got: str):
        self.surface = surface
        self.got = got
        super().__init__(f"tokenizer does not round-trip {surface!r} (got {got!r})")


class EmptyCandidateSetError(EDKitError):
    """Instance has no candidates to choose from."""


class InvalidPrefixError(EDKitError):
    """Token prefix leaves the candidate trie."""


class ScorerFailure(EDKitError):
    """Pluggable scorer raised or broke its contract."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(f"step {step}: {message}" if step is not None else message)


class BudgetTooSmallError(EDKitError):
    """Candidate surfaces plus separators alone exceed the token budget."""


class NoTokensError(EDKitError):
    """Span scorer returned an empty token list."""


class NoOverlapError(EDKitError):
    """Predicted span overlaps no candidate span."""


class EmptyRecordSetError(EDKitError):
    """Metric requested over zero prediction records."""


class UnknownDatasetError(EDKitError):
    """A dataset name does not match any scored dataset."""


class MisalignedRecordsError(EDKitError):
    """Two record sets do not cover the same instance ids."""


class BridgeError(EDKitError):
    """Bridge process failed or answered with an error."""
