"""Render candidate surfaces from titles plus the description map.

A candidate with a known description renders as "title: description"; a
lookup miss falls back to the bare title, so every candidate always has a
usable surface.
"""

from __future__ import annotations

import math
from typing import Iterable

from .types import CandidateRepresentation, EDInstance, Tokenizer
from .wikidata import DescriptionMap

MODES = ("title-only", "with-description")


def make_representation(title: str, mapping: DescriptionMap) -> CandidateRepresentation:
    return CandidateRepresentation(title, mapping.lookup(title))


def make_representations(
    instance: EDInstance, mapping: DescriptionMap
) -> list[CandidateRepresentation]:
    """Representations aligned 1:1 with the instance's candidate list.

    Surfaces are pairwise distinct whenever titles are: equal surfaces would
    need equal "title[: description]" renderings, impossible for distinct
    titles under the colon scheme unless one title embeds the other plus
    ": ", which the assertion below catches instead of silently allowing.
    """
    reps = [make_representation(title, mapping) for title in instance.candidates]
    surfaces = {rep.surface for rep in reps}
    if len(surfaces) != len(reps):
        raise ValueError(f"{instance.id}: rendered surfaces are not pairwise distinct")
    return reps


def representation_length_stats(
    instances: Iterable[EDInstance],
    mapping: DescriptionMap,
    tokenizer: Tokenizer,
    mode: str = "with-description",
) -> tuple[float, int]:
    """(mean, p99) of tokenized surface lengths over candidate occurrences.

    Every candidate occurrence counts, not unique titles. p99 is the
    nearest-rank percentile: the smallest length covering at least 99% of
    occurrences, an integer like the lengths themselves.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    lengths: list[int] = []
    length_cache: dict[str, int] = {}
    for inst in instances:
        for title in inst.candidates:
            if mode == "title-only":
                surface = title
            else:
                surface = make_representation(title, mapping).surface
            n = length_cache.get(surface)
            if n is None:
                n = len(tokenizer.encode(surface))
                length_cache[surface] = n
            lengths.append(n)
    if not lengths:
        raise ValueError("no candidate occurrences to measure")
    lengths.sort()
    mean = sum(lengths) / len(lengths)
    p99 = lengths[math.ceil(0.99 * len(lengths)) - 1]
    return mean, p99
