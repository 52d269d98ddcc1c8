"""Deterministic reference scorers and tokenizer.

These exercise every decoding path with no trained model in the loop: an
add-one-smoothed n-gram model for the generative side, an exact-word
overlap counter for the extractive side, and an oracle that peaks on a
known gold surface for both. All of them are pure functions of their
inputs; repeated calls return identical results.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Sequence

from .extractive import SEPARATOR
from .types import MENTION_CLOSE, MENTION_OPEN, CandidateRepresentation, Tokenizer

_WORD = re.compile(r"\S+")


class WhitespaceTokenizer:
    """Word-per-token codec with a vocabulary that grows on first sight.

    Round-trips any string whose words are separated by single spaces with
    no leading or trailing whitespace, which is exactly what normalized
    titles and ingested descriptions look like.
    """

    def __init__(self) -> None:
        self.bos_id = 0
        self.eos_id = 1
        self._ids: dict[str, int] = {}
        self._words: list[str] = ["<bos>", "<eos>"]

    def encode(self, text: str) -> list[int]:
        ids = []
        for word in text.split():
            token = self._ids.get(word)
            if token is None:
                token = len(self._words)
                self._ids[word] = token
                self._words.append(word)
            ids.append(token)
        return ids

    def decode(self, ids: Sequence[int]) -> str:
        return " ".join(self._words[i] for i in ids)


class NGramScorer:
    """Add-one-smoothed token n-gram model estimated on candidate surfaces.

    Sequences are encode(surface) + [eos], contexts padded with bos; the
    vocabulary is every corpus token plus eos. Probabilities over the
    vocabulary sum to one for any context, and every log-probability is
    finite. The marked context argument is ignored: this model only exists
    to give beam search a deterministic, well-formed signal.
    """

    def __init__(self, reps: Sequence[CandidateRepresentation], tokenizer: Tokenizer, order: int = 2):
        if order < 1:
            raise ValueError(f"n-gram order must be >= 1, got {order}")
        self.order = order
        self._counts: dict[tuple[int, ...], Counter] = {}
        self._totals: dict[tuple[int, ...], int] = {}
        vocab: set[int] = {tokenizer.eos_id}
        bos = tokenizer.bos_id
        for rep in reps:
            ids = [*tokenizer.encode(rep.surface), tokenizer.eos_id]
            vocab.update(ids)
            padded = [bos] * (order - 1) + ids
            for j, token in enumerate(ids):
                context = tuple(padded[j : j + order - 1])
                self._counts.setdefault(context, Counter())[token] += 1
                self._totals[context] = self._totals.get(context, 0) + 1
        self._vocab_size = len(vocab)
        self._bos = bos

    def next_logprobs(
        self, marked_context: str, prefix: Sequence[int], allowed: Sequence[int]
    ) -> dict[int, float]:
        if self.order == 1:
            context: tuple[int, ...] = ()
        else:
            padded = [self._bos] * (self.order - 1) + list(prefix)
            context = tuple(padded[-(self.order - 1) :])
        counts = self._counts.get(context, ())
        total = self._totals.get(context, 0)
        denom = total + self._vocab_size
        return {
            t: math.log((counts[t] if counts else 0) + 1) - math.log(denom) for t in allowed
        }


def ngram_scorer(
    reps: Sequence[CandidateRepresentation], tokenizer: Tokenizer, order: int = 2
) -> NGramScorer:
    return NGramScorer(reps, tokenizer, order)


def _context_segments(context: str) -> list[tuple[int, int, str]]:
    """(start, end, surface) per candidate segment of an assembled context."""
    segments = []
    offset = 0
    for piece in context.split(SEPARATOR):
        segments.append((offset, offset + len(piece), piece))
        offset += len(piece) + len(SEPARATOR)
    return segments


def _token_spans(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in _WORD.finditer(text)]


class OverlapSpanScorer:
    """Counts exact word overlap between each candidate surface and the query.

    Context tokens inherit the overlap count of the candidate segment that
    contains them; separator tokens score zero. Marker words are excluded
    from the query side. Exact means exact: "Portugal" does not match
    "Portoguese" and "Ronaldo:" does not match "Ronaldo".
    """

    def __init__(self, policy: str = "exact-word"):
        if policy != "exact-word":
            raise ValueError(f"unknown overlap policy {policy!r}")
        self.policy = policy

    def span_scores(
        self, query: str, context: str
    ) -> tuple[list[tuple[int, int]], list[float], list[float]]:
        query_words = {w for w in query.split() if w not in (MENTION_OPEN, MENTION_CLOSE)}
        segments = _context_segments(context)
        segment_scores = [
            float(sum(1 for w in surface.split() if w in query_words))
            for _, _, surface in segments
        ]
        spans = _token_spans(context)
        scores = []
        for ts, te in spans:
            score = 0.0
            for (ss, se, _), seg_score in zip(segments, segment_scores):
                if ts >= ss and te <= se:
                    score = seg_score
                    break
            scores.append(score)
        return spans, list(scores), list(scores)


def overlap_span_scorer(policy: str = "exact-word") -> OverlapSpanScorer:
    return OverlapSpanScorer(policy)


_MISS = -1000.0  # finite penalty keeps beam bookkeeping free of special cases


class OracleScorer:
    """Peaks exactly on a known gold surface, in both formulations.

    Generative: zero log-probability along the gold token path, -1000
    elsewhere. Extractive: start/end scores peak at the gold span's first
    and last tokens. With the gold outside the candidate set the decoder
    still returns some candidate and the evaluation charges the error.
    """

    def __init__(self, gold_surface: str, tokenizer: Tokenizer | None = None):
        self.gold_surface = gold_surface
        self._tokenizer = tokenizer
        self._gold_ids: tuple[int, ...] | None = None

    def _gold_path(self) -> tuple[int, ...]:
        if self._gold_ids is None:
            if self._tokenizer is None:
                raise ValueError("generative oracle scoring needs a tokenizer")
            self._gold_ids = (*self._tokenizer.encode(self.gold_surface), self._tokenizer.eos_id)
        return self._gold_ids

    def next_logprobs(
        self, marked_context: str, prefix: Sequence[int], allowed: Sequence[int]
    ) -> dict[int, float]:
        gold = self._gold_path()
        n = len(prefix)
        on_path = n < len(gold) and tuple(prefix) == gold[:n]
        return {t: 0.0 if on_path and t == gold[n] else _MISS for t in allowed}

    def span_scores(
        self, query: str, context: str
    ) -> tuple[list[tuple[int, int]], list[float], list[float]]:
        spans = _token_spans(context)
        start = [_MISS] * len(spans)
        end = [_MISS] * len(spans)
        for ss, se, surface in _context_segments(context):
            if surface == self.gold_surface:
                inside = [t for t, (ts, te) in enumerate(spans) if ts >= ss and te <= se]
                if inside:
                    start[inside[0]] = 0.0
                    end[inside[-1]] = 0.0
                break
        return spans, start, end


def oracle_scorer(gold_surface: str, tokenizer: Tokenizer | None = None) -> OracleScorer:
    return OracleScorer(gold_surface, tokenizer)
