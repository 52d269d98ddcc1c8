"""Shared fixtures-by-hand: random instance factories, reference oracles,
and tiny deterministic scorers used across the test modules."""

from __future__ import annotations

import math
import random

from edkit import DescriptionMap, EDInstance, MentionSpan

WORDS = (
    "alpha", "beta", "gamma", "delta", "union", "city",
    "club", "river", "north", "player", "song", "treaty",
)


def random_instance(
    rng: random.Random,
    n_candidates: int | None = None,
    max_candidates: int = 8,
    description_rate: float = 0.7,
) -> tuple[EDInstance, DescriptionMap]:
    """One random instance plus a description map covering part of its set."""
    n = n_candidates if n_candidates is not None else rng.randint(1, max_candidates)
    keys = rng.sample(range(10_000), n)
    titles = [f"{rng.choice(WORDS).capitalize()} {key}" for key in keys]
    entries = {}
    for title in titles:
        if rng.random() < description_rate:
            entries[title] = " ".join(rng.choices(WORDS, k=rng.randint(2, 6)))
    tokens = rng.choices(WORDS, k=rng.randint(3, 10))
    text = " ".join(tokens)
    pick = rng.randrange(len(tokens))
    start = sum(len(t) + 1 for t in tokens[:pick])
    end = start + len(tokens[pick])
    instance = EDInstance(
        f"rnd#{rng.randrange(10**9)}",
        text,
        MentionSpan(start, end),
        tuple(titles),
        gold=rng.choice(titles),
    )
    return instance, DescriptionMap(entries)


class UniformScorer:
    """log(1/|allowed|) for every allowed token."""

    def next_logprobs(self, marked_context, prefix, allowed):
        lp = -math.log(len(allowed))
        return {t: lp for t in allowed}


class HashScorer:
    """Deterministic pseudo-random log-probabilities keyed by (prefix, token).

    Tuple-of-int hashing is stable across processes (no string hash
    randomization involved), so scores reproduce everywhere.
    """

    def __init__(self, seed: int):
        self.seed = seed

    def next_logprobs(self, marked_context, prefix, allowed):
        out = {}
        for t in allowed:
            h = hash((self.seed, tuple(prefix), t))
            out[t] = -10.0 * ((h % 9973) / 9973.0)
        return out


def sequence_score(scorer, marked: str, seq) -> float:
    """Reference path score: sum of stepwise log-probabilities."""
    total = 0.0
    for k, token in enumerate(seq):
        total += scorer.next_logprobs(marked, tuple(seq[:k]), [token])[token]
    return total


def exhaustive_ranking(reps, scorer, tokenizer, marked: str) -> list[tuple[str, float]]:
    """Score every candidate sequence outright; no search, no pruning."""
    scored = []
    for rep in reps:
        seq = (*tokenizer.encode(rep.surface), tokenizer.eos_id)
        scored.append((rep.title, rep.surface, sequence_score(scorer, marked, seq)))
    scored.sort(key=lambda row: (-row[2], row[1]))
    return [(title, score) for title, _, score in scored]
