"""Trie-constrained beam search over a pluggable token scorer.

Every hypothesis is a path in the candidate trie, so the decoder can only
ever emit a candidate surface; validity is by construction, never by
post-hoc matching. Hypotheses are compared by raw summed log-probability
(no length normalization); ties break to the lexicographically smaller
surface so runs are reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from .errors import EmptyCandidateSetError, ScorerFailure
from .trie import CandidateTrie, build_trie
from .types import CandidateRepresentation, EDInstance, Tokenizer, mark_mention

DEFAULT_BEAM = 5


@runtime_checkable
class TokenScorer(Protocol):
    """Next-token log-probabilities given the marked context and a prefix.

    Must return a finite value for every requested allowed id; returning a
    superset is tolerated (the decoder masks), a missing id is an error.
    """

    def next_logprobs(
        self, marked_context: str, prefix: Sequence[int], allowed: Sequence[int]
    ) -> dict[int, float]: ...


@dataclass(frozen=True, slots=True)
class Hypothesis:
    prefix: tuple[int, ...]
    score: float
    node: int
    complete: bool = False


@dataclass(frozen=True, slots=True)
class DecodeResult:
    winner: str
    ranked: list[tuple[str, float]]


def decode(
    instance: EDInstance,
    reps: Sequence[CandidateRepresentation],
    scorer: TokenScorer,
    tokenizer: Tokenizer,
    beam: int = DEFAULT_BEAM,
) -> DecodeResult:
    """Pick a candidate by constrained beam search.

    Completed hypotheses retire into a result pool and the search runs until
    the beam empties, so short candidates cannot starve longer ones. The
    ranked list holds every completion found, best first, score = sum of
    step log-probabilities including the eos step.
    """
    if not reps:
        raise EmptyCandidateSetError(f"{instance.id}: no candidates to decode over")
    if len(reps) != len(instance.candidates):
        raise ValueError(
            f"{instance.id}: {len(reps)} representations for {len(instance.candidates)} candidates"
        )
    if beam < 1:
        raise ValueError(f"beam width must be >= 1, got {beam}")
    trie = build_trie(reps, tokenizer)
    marked = mark_mention(instance)

    active = [Hypothesis(prefix=(), score=0.0, node=0)]
    pool: list[tuple[int, float]] = []  # (candidate index, final score)
    step = 0
    while active:
        expansions: list[Hypothesis] = []
        for hyp in active:
            children = trie.children(hyp.node)
            allowed = sorted(children)
            try:
                logprobs = scorer.next_logprobs(marked, hyp.prefix, allowed)
            except ScorerFailure:
                raise
            except Exception as exc:
                raise ScorerFailure(str(exc), step=step) from exc
            for token in allowed:
                lp = logprobs.get(token)
                if lp is None:
                    raise ScorerFailure(f"scorer returned no value for allowed id {token}", step=step)
                if not math.isfinite(lp):
                    raise ScorerFailure(f"non-finite log-probability for id {token}", step=step)
                node = children[token]
                candidate = Hypothesis(
                    prefix=hyp.prefix + (token,),
                    score=hyp.score + lp,
                    node=node,
                    complete=token == trie.eos_id and trie.is_terminal(node),
                )
                if candidate.complete:
                    pool.append((trie.payload(node), candidate.score))
                else:
                    expansions.append(candidate)
        expansions.sort(key=lambda h: (-h.score, h.prefix))
        active = expansions[:beam]
        step += 1

    pool.sort(key=lambda entry: (-entry[1], reps[entry[0]].surface))
    ranked = [(reps[idx].title, score) for idx, score in pool]
    return DecodeResult(winner=ranked[0][0], ranked=ranked)


def decode_batch(
    instances: Sequence[EDInstance],
    reps_per_instance: Sequence[Sequence[CandidateRepresentation]],
    scorer: TokenScorer,
    tokenizer: Tokenizer,
    beam: int = DEFAULT_BEAM,
) -> list[DecodeResult | Exception]:
    """Elementwise decode; per-instance failures come back in-slot instead
    of aborting the batch (asyncio.gather(return_exceptions=True) style)."""
    results: list[DecodeResult | Exception] = []
    for instance, reps in zip(instances, reps_per_instance):
        try:
            results.append(decode(instance, reps, scorer, tokenizer, beam))
        except Exception as exc:  # noqa: BLE001 - error isolation is the contract
            results.append(exc)
    return results
