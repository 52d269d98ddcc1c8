"""Token-level prefix tree over tokenized candidate surfaces.

The trie is the constraint oracle for generative decoding: a prefix maps to
the exact set of tokens that can legally extend it. End-of-sequence is an
ordinary edge to a terminal node, so completion needs no special casing in
the search loop; terminal nodes carry the candidate index as payload.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import EmptyCandidateSetError, InvalidPrefixError, TokenizerRoundTripError
from .types import CandidateRepresentation, Tokenizer


class CandidateTrie:
    """Immutable after build; nodes are parallel arrays indexed by node id."""

    __slots__ = ("_children", "_payload", "eos_id", "size")

    def __init__(self, eos_id: int):
        self._children: list[dict[int, int]] = [{}]
        # candidate index at terminal nodes, -1 elsewhere
        self._payload: list[int] = [-1]
        self.eos_id = eos_id
        self.size = 0

    def _insert(self, ids: Sequence[int], payload: int) -> None:
        node = 0
        for token in ids:
            nxt = self._children[node].get(token)
            if nxt is None:
                nxt = len(self._children)
                self._children[node][token] = nxt
                self._children.append({})
                self._payload.append(-1)
            node = nxt
        self._payload[node] = payload
        self.size += 1

    def node_at(self, prefix: Sequence[int]) -> int:
        node = 0
        for depth, token in enumerate(prefix):
            nxt = self._children[node].get(token)
            if nxt is None:
                raise InvalidPrefixError(f"prefix leaves the trie at position {depth} (token {token})")
            node = nxt
        return node

    def step(self, node: int, token: int) -> int | None:
        return self._children[node].get(token)

    def children(self, node: int) -> dict[int, int]:
        return self._children[node]

    def is_terminal(self, node: int) -> bool:
        return self._payload[node] >= 0

    def payload(self, node: int) -> int:
        return self._payload[node]

    def terminals(self) -> Iterable[int]:
        return (n for n, p in enumerate(self._payload) if p >= 0)


def build_trie(reps: Sequence[CandidateRepresentation], tokenizer: Tokenizer) -> CandidateTrie:
    """Insert encode(surface) + [eos] for every candidate.

    Enforces the round-trip contract decode(encode(s)) == s per surface and
    pairwise-distinct surfaces; both violations are caller errors, not data
    to tolerate.
    """
    if not reps:
        raise EmptyCandidateSetError("cannot build a trie over zero candidates")
    surfaces = [rep.surface for rep in reps]
    if len(set(surfaces)) != len(surfaces):
        raise ValueError("candidate surfaces must be pairwise distinct")
    trie = CandidateTrie(tokenizer.eos_id)
    for index, surface in enumerate(surfaces):
        ids = tokenizer.encode(surface)
        decoded = tokenizer.decode(ids)
        if decoded != surface:
            raise TokenizerRoundTripError(surface, decoded)
        if tokenizer.eos_id in ids:
            raise ValueError(f"encoding of {surface!r} contains the eos id; paths would be ambiguous")
        trie._insert([*ids, tokenizer.eos_id], index)
    return trie


def allowed_next(trie: CandidateTrie, prefix: Sequence[int]) -> set[int]:
    """Exactly the tokens t with prefix+[t] a path prefix of an inserted
    sequence; contains eos iff the prefix ends a full candidate surface."""
    return set(trie.children(trie.node_at(prefix)))
