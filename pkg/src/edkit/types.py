"""Domain vocabulary: titles, spans, instances, mention marking, tokenizer contract.

Entity titles are plain normalized strings (see :func:`normalize_title`);
wrapping them in a value class would buy nothing over validation at the
boundaries where titles enter the system.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

from .errors import EmptyTitleError, InvalidSpanError

MENTION_OPEN = "<s>"
MENTION_CLOSE = "</s>"

_WS_TO_SPACE = str.maketrans({"\t": " ", "\n": " ", "\r": " "})


def normalize_title(raw: str) -> str:
    """Normalize a Wikipedia page title: underscores to spaces, NFC, trimmed.

    Tabs and newlines become single spaces so titles stay single-line and
    TSV-safe. Idempotent. Raises EmptyTitleError when nothing remains.
    """
    title = unicodedata.normalize("NFC", raw.replace("_", " ").translate(_WS_TO_SPACE)).strip()
    if not title:
        raise EmptyTitleError(f"title normalizes to empty: {raw!r}")
    return title


def is_normalized_title(title: str) -> bool:
    try:
        return normalize_title(title) == title
    except EmptyTitleError:
        return False


@dataclass(frozen=True, slots=True)
class MentionSpan:
    """Character span [start, end) of a mention inside its owning text."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise InvalidSpanError(f"need 0 <= start < end, got [{self.start}, {self.end})")


@dataclass(frozen=True, slots=True)
class EDInstance:
    """One mention-in-context with its candidate set and optional gold entity.

    Candidates keep input order and must be pairwise distinct. A gold entity
    absent from the candidate set is legal: no system can recover it, and the
    evaluation charges the error instead of rejecting the instance.
    """

    id: str
    text: str
    mention: MentionSpan
    candidates: tuple[str, ...]
    gold: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.candidates, tuple):
            object.__setattr__(self, "candidates", tuple(self.candidates))
        if self.mention.end > len(self.text):
            raise InvalidSpanError(
                f"{self.id}: span [{self.mention.start}, {self.mention.end}) "
                f"exceeds text length {len(self.text)}"
            )
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"{self.id}: candidate titles must be pairwise distinct")
        if self.gold is not None and not self.gold:
            raise EmptyTitleError(f"{self.id}: gold title is empty")

    @property
    def mention_text(self) -> str:
        return self.text[self.mention.start : self.mention.end]

    @property
    def gold_in_candidates(self) -> bool:
        return self.gold is not None and self.gold in self.candidates


@dataclass(frozen=True, slots=True)
class CandidateRepresentation:
    """Textual surface of a candidate: "title: description", or the bare title."""

    title: str
    description: str | None
    surface: str = field(init=False)

    def __post_init__(self) -> None:
        rendered = f"{self.title}: {self.description}" if self.description else self.title
        object.__setattr__(self, "surface", rendered)


@runtime_checkable
class Tokenizer(Protocol):
    """Token codec used for tries, decoding, and length statistics.

    decode(encode(s)) == s must hold for every candidate surface a trie is
    built over; the trie builder enforces it.
    """

    bos_id: int
    eos_id: int

    def encode(self, text: str) -> list[int]: ...

    def decode(self, ids: Sequence[int]) -> str: ...


def mark_mention(instance: EDInstance) -> str:
    """Wrap the mention in its context between "<s>" and "</s>" markers.

    One padding space separates each marker from the mention so subword
    tokenizers cannot fuse marker and mention tokens. Raises ValueError if
    the text already contains a marker: the exactly-one-occurrence invariant
    could not hold.
    """
    text, span = instance.text, instance.mention
    if MENTION_OPEN in text or MENTION_CLOSE in text:
        raise ValueError(f"{instance.id}: text already contains a mention marker")
    return (
        text[: span.start]
        + MENTION_OPEN
        + " "
        + text[span.start : span.end]
        + " "
        + MENTION_CLOSE
        + text[span.end :]
    )


def strip_mention_markers(marked: str) -> str:
    """Inverse of mark_mention: remove both markers and their padding spaces."""
    return marked.replace(MENTION_OPEN + " ", "", 1).replace(" " + MENTION_CLOSE, "", 1)
