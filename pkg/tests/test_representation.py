from __future__ import annotations

import math
import random

import pytest

from edkit import (
    DescriptionMap,
    EDInstance,
    MentionSpan,
    WhitespaceTokenizer,
    make_representation,
    make_representations,
    representation_length_stats,
)

FOOTBALL = DescriptionMap(
    {
        "Ronaldo": "Brazilian association football player",
        "Cristiano Ronaldo": "Portoguese association football player",
    }
)


def make_instance(candidates, gold=None):
    return EDInstance("r#0", "Ronaldo scored", MentionSpan(0, 7), tuple(candidates), gold)


def test_surface_with_description():
    rep = make_representation("Ronaldo", FOOTBALL)
    assert rep.surface == "Ronaldo: Brazilian association football player"


def test_surface_second_example():
    rep = make_representation("Cristiano Ronaldo", FOOTBALL)
    assert rep.surface == "Cristiano Ronaldo: Portoguese association football player"


def test_surface_fallback_on_miss():
    assert make_representation("Some Title", DescriptionMap()).surface == "Some Title"


def test_representations_align_with_candidates():
    inst = make_instance(["Ronaldo", "Cristiano Ronaldo", "Unmapped"])
    reps = make_representations(inst, FOOTBALL)
    assert [rep.title for rep in reps] == list(inst.candidates)
    assert reps[2].surface == "Unmapped"


def test_representations_reject_surface_clash():
    # Distinct titles whose renderings collide once the description lands.
    mapping = DescriptionMap({"A": "x"})
    inst = make_instance(["A", "A: x"])
    with pytest.raises(ValueError):
        make_representations(inst, mapping)


def test_length_stats_singleton():
    inst = make_instance(["Alpha Beta Gamma"])
    mean, p99 = representation_length_stats([inst], DescriptionMap(), WhitespaceTokenizer(), "title-only")
    assert mean == 3.0
    assert p99 == 3


def test_length_stats_counts_occurrences_not_unique_titles():
    # "A" appears twice (1 token each) and "B C D E" once (4 tokens):
    # mean over occurrences is 2.0, not the 2.5 a unique-title mean would give.
    insts = [make_instance(["A"]), make_instance(["A", "B C D E"])]
    mean, p99 = representation_length_stats(insts, DescriptionMap(), WhitespaceTokenizer(), "title-only")
    assert mean == pytest.approx(2.0)
    assert p99 == 4


def test_length_stats_nearest_rank_p99():
    lengths = list(range(1, 201))
    titles = [" ".join(["w"] * n) + f" t{n}" for n in lengths]  # n+1 tokens each
    insts = [make_instance([t]) for t in titles]
    _, p99 = representation_length_stats(insts, DescriptionMap(), WhitespaceTokenizer(), "title-only")
    assert p99 == lengths[math.ceil(0.99 * 200) - 1] + 1


def test_length_stats_rejects_unknown_mode():
    with pytest.raises(ValueError):
        representation_length_stats([make_instance(["A"])], DescriptionMap(), WhitespaceTokenizer(), "words")


def test_with_description_mean_dominates_title_only():
    rng = random.Random(7)
    titles = [f"Title{i} extra{i % 3}" for i in range(30)]
    mapping = DescriptionMap(
        {t: " ".join(["word"] * rng.randint(1, 6)) for t in rng.sample(titles, 12)}
    )
    insts = [
        make_instance(rng.sample(titles, rng.randint(1, 5)))
        for _ in range(40)
    ]
    tokenizer = WhitespaceTokenizer()
    title_mean, _ = representation_length_stats(insts, mapping, tokenizer, "title-only")
    desc_mean, _ = representation_length_stats(insts, mapping, tokenizer, "with-description")
    assert desc_mean >= title_mean
