from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edkit import CandidateRepresentation, WhitespaceTokenizer, allowed_next, build_trie
from edkit.errors import EmptyCandidateSetError, InvalidPrefixError, TokenizerRoundTripError


class CharTokenizer:
    """Character-level codec; every string round-trips."""

    bos_id = 1_114_112
    eos_id = 1_114_113

    def encode(self, text: str) -> list[int]:
        return [ord(c) for c in text]

    def decode(self, ids) -> str:
        return "".join(chr(i) for i in ids)


def reps(*surfaces: str) -> list[CandidateRepresentation]:
    return [CandidateRepresentation(surface, None) for surface in surfaces]


def tokenized(surfaces, tokenizer):
    return [tuple(tokenizer.encode(s)) + (tokenizer.eos_id,) for s in surfaces]


def brute_force_allowed(sequences, prefix) -> set[int]:
    """Reference implementation: filter full sequences by the prefix."""
    k = len(prefix)
    return {seq[k] for seq in sequences if len(seq) > k and seq[:k] == tuple(prefix)}


def all_proper_prefixes(sequences):
    seen = {()}
    for seq in sequences:
        for k in range(1, len(seq)):
            seen.add(seq[:k])
    return seen


def test_shared_prefix_branches():
    tokenizer = WhitespaceTokenizer()
    trie = build_trie(reps("A B", "A C"), tokenizer)
    a, b, c = (tokenizer.encode(w)[0] for w in ("A", "B", "C"))
    assert allowed_next(trie, []) == {a}
    assert allowed_next(trie, [a]) == {b, c}
    assert allowed_next(trie, [a, b]) == {tokenizer.eos_id}
    assert allowed_next(trie, [a, c]) == {tokenizer.eos_id}


def test_terminal_does_not_block_longer_surface():
    tokenizer = CharTokenizer()
    surfaces = ("A", "A: x")
    trie = build_trie(reps(*surfaces), tokenizer)
    sequences = tokenized(surfaces, tokenizer)
    for prefix in all_proper_prefixes(sequences):
        assert allowed_next(trie, prefix) == brute_force_allowed(sequences, prefix)
    assert allowed_next(trie, tokenizer.encode("A")) == {tokenizer.eos_id, ord(":")}


def test_single_surface_single_path():
    tokenizer = WhitespaceTokenizer()
    surface = "Ronaldo: Brazilian association football player"
    trie = build_trie(reps(surface), tokenizer)
    assert trie.size == 1
    assert len(list(trie.terminals())) == 1
    node = trie.node_at(tokenizer.encode(surface) + [tokenizer.eos_id])
    assert trie.is_terminal(node)
    assert trie.payload(node) == 0


def test_terminal_count_and_payload_alignment():
    tokenizer = CharTokenizer()
    surfaces = ("ab", "ac", "abc", "b")
    trie = build_trie(reps(*surfaces), tokenizer)
    assert len(list(trie.terminals())) == len(surfaces)
    for index, surface in enumerate(surfaces):
        node = trie.node_at(tokenizer.encode(surface) + [tokenizer.eos_id])
        assert trie.payload(node) == index


def test_empty_candidate_set_rejected():
    with pytest.raises(EmptyCandidateSetError):
        build_trie([], WhitespaceTokenizer())


def test_duplicate_surfaces_rejected():
    with pytest.raises(ValueError):
        build_trie(reps("A", "A"), WhitespaceTokenizer())


def test_round_trip_violation_reported_with_surface():
    class Lossy(CharTokenizer):
        def decode(self, ids) -> str:
            return super().decode(ids).lower()

    with pytest.raises(TokenizerRoundTripError) as exc:
        build_trie(reps("Ab"), Lossy())
    assert "Ab" in str(exc.value)


def test_eos_inside_encoding_rejected():
    class EosLeak(CharTokenizer):
        def encode(self, text: str) -> list[int]:
            return [self.eos_id for _ in text]

        def decode(self, ids) -> str:
            return "x" * len(list(ids))

    with pytest.raises(ValueError):
        build_trie(reps("x"), EosLeak())


def test_invalid_prefix_reports_position():
    tokenizer = CharTokenizer()
    trie = build_trie(reps("abc"), tokenizer)
    with pytest.raises(InvalidPrefixError) as exc:
        allowed_next(trie, [ord("a"), ord("z")])
    assert "position 1" in str(exc.value)


@given(st.sets(st.text(alphabet="abcd:", min_size=1, max_size=6), min_size=1, max_size=12))
def test_allowed_next_matches_brute_force(surfaces):
    tokenizer = CharTokenizer()
    trie = build_trie(reps(*sorted(surfaces)), tokenizer)
    sequences = tokenized(sorted(surfaces), tokenizer)
    for prefix in all_proper_prefixes(sequences):
        assert allowed_next(trie, prefix) == brute_force_allowed(sequences, prefix)
