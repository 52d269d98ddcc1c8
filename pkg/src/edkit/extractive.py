"""Extractive formulation: query = marked context, context = joined surfaces.

The candidate surfaces are concatenated with the literal separator
" <sep> " and each candidate's exact character span inside that context is
recorded, so a span prediction resolves back to a candidate without string
matching. When a token budget is set, only the query text is ever truncated
(symmetrically around the mention, whole words at a time); the candidate
surfaces are the answer space and must survive intact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from .errors import (
    BudgetTooSmallError,
    EmptyCandidateSetError,
    NoOverlapError,
    NoTokensError,
    ScorerFailure,
)
from .types import (
    MENTION_CLOSE,
    MENTION_OPEN,
    CandidateRepresentation,
    EDInstance,
    Tokenizer,
    mark_mention,
)

SEPARATOR = " <sep> "


@runtime_checkable
class SpanScorer(Protocol):
    """Start/end scores per context token, with token character spans."""

    def span_scores(
        self, query: str, context: str
    ) -> tuple[list[tuple[int, int]], list[float], list[float]]: ...


@dataclass(frozen=True, slots=True)
class AssembledInput:
    query: str
    context: str
    spans: tuple[tuple[int, tuple[int, int]], ...]  # (candidate index, [start, end))
    truncated_query: bool = False


def assemble(
    instance: EDInstance,
    reps: Sequence[CandidateRepresentation],
    budget: int | None = None,
    tokenizer: Tokenizer | None = None,
) -> AssembledInput:
    """Build the (query, context) pair plus per-candidate character spans."""
    if not reps:
        raise EmptyCandidateSetError(f"{instance.id}: nothing to assemble")
    if len(reps) != len(instance.candidates):
        raise ValueError(
            f"{instance.id}: {len(reps)} representations for {len(instance.candidates)} candidates"
        )
    if budget is not None and tokenizer is None:
        raise ValueError("a tokenizer is required when a token budget is set")

    pieces: list[str] = []
    spans: list[tuple[int, tuple[int, int]]] = []
    offset = 0
    for index, rep in enumerate(reps):
        if index:
            offset += len(SEPARATOR)
        pieces.append(rep.surface)
        spans.append((index, (offset, offset + len(rep.surface))))
        offset += len(rep.surface)
    context = SEPARATOR.join(pieces)

    query = mark_mention(instance)
    truncated = False
    if budget is not None:
        assert tokenizer is not None
        context_tokens = len(tokenizer.encode(context))
        if context_tokens > budget:
            raise BudgetTooSmallError(
                f"{instance.id}: candidate surfaces + separators need {context_tokens} tokens, "
                f"budget is {budget}"
            )
        query, truncated = _truncate_query(query, budget - context_tokens, tokenizer)
    return AssembledInput(query=query, context=context, spans=tuple(spans), truncated_query=truncated)


def _truncate_query(query: str, query_budget: int, tokenizer: Tokenizer) -> tuple[str, bool]:
    """Drop whole words from both query ends until the budget fits.

    The marked mention is the floor: it is never truncated, even if the
    budget is still exceeded once nothing else remains.
    """
    if len(tokenizer.encode(query)) <= query_budget:
        return query, False
    open_at = query.index(MENTION_OPEN)
    close_at = query.index(MENTION_CLOSE) + len(MENTION_CLOSE)
    left = query[:open_at].split()
    core = query[open_at:close_at]
    right = query[close_at:].split()
    while left or right:
        if left:
            left = left[1:]
        if right:
            right = right[:-1]
        rebuilt = _join_query(left, core, right)
        if len(tokenizer.encode(rebuilt)) <= query_budget:
            return rebuilt, True
    return _join_query([], core, []), True


def _join_query(left: list[str], core: str, right: list[str]) -> str:
    parts = []
    if left:
        parts.append(" ".join(left))
    parts.append(core)
    if right:
        parts.append(" ".join(right))
    return " ".join(parts)


@dataclass(frozen=True, slots=True)
class ExtractResult:
    winner: str
    scores: list[tuple[str, float]]


def extract(
    instance: EDInstance,
    reps: Sequence[CandidateRepresentation],
    scorer: SpanScorer,
    budget: int | None = None,
    tokenizer: Tokenizer | None = None,
) -> ExtractResult:
    """Score every candidate span and return the argmax candidate.

    A candidate's score is start[i] + end[j] for the first and last context
    tokens overlapping its recorded span; ties break to the smaller surface.
    """
    assembled = assemble(instance, reps, budget=budget, tokenizer=tokenizer)
    try:
        token_spans, start_scores, end_scores = scorer.span_scores(
            assembled.query, assembled.context
        )
    except ScorerFailure:
        raise
    except Exception as exc:
        raise ScorerFailure(str(exc)) from exc
    if not token_spans:
        raise NoTokensError(f"{instance.id}: span scorer returned no tokens")
    if not (len(token_spans) == len(start_scores) == len(end_scores)):
        raise ScorerFailure(
            f"span scorer shape mismatch: {len(token_spans)} spans, "
            f"{len(start_scores)} start scores, {len(end_scores)} end scores"
        )

    scored: list[tuple[str, float, str]] = []
    for index, (span_start, span_end) in assembled.spans:
        first = last = None
        for t, (ts, te) in enumerate(token_spans):
            if ts < span_end and te > span_start:
                if first is None:
                    first = t
                last = t
        if first is None or last is None:
            raise ScorerFailure(
                f"no context token overlaps candidate {index} span [{span_start}, {span_end})"
            )
        rep = reps[index]
        scored.append((rep.title, start_scores[first] + end_scores[last], rep.surface))
    scored.sort(key=lambda entry: (-entry[1], entry[2]))
    return ExtractResult(winner=scored[0][0], scores=[(t, s) for t, s, _ in scored])


def resolve_span(assembled: AssembledInput, predicted: tuple[int, int]) -> int:
    """Candidate index whose span maximally overlaps a predicted char span.

    Needed when an unconstrained external model predicts free spans; ties go
    to the smaller candidate index, and a span living entirely inside a
    separator overlaps nothing.
    """
    p_start, p_end = predicted
    if p_start < 0 or p_end > len(assembled.context) or p_start >= p_end:
        raise ValueError(f"predicted span [{p_start}, {p_end}) outside context bounds")
    best_index = -1
    best_overlap = 0
    for index, (span_start, span_end) in assembled.spans:
        overlap = min(p_end, span_end) - max(p_start, span_start)
        if overlap > best_overlap:
            best_overlap = overlap
            best_index = index
    if best_index < 0:
        raise NoOverlapError(f"span [{p_start}, {p_end}) overlaps no candidate span")
    return best_index
