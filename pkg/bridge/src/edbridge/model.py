"""Models the server can host.

A model bundles a tokenizer with the two scoring heads the protocol exposes:
next-token log-probabilities for generative decoding and start/end span
scores for extractive selection. The stub below is the reference
implementation: fully deterministic, dependency-free, and fast, so protocol
conformance can be tested without downloading a checkpoint. A real
checkpoint-backed model plugs in by implementing the same four methods plus
the bos_id/eos_id attributes and registering itself in MODELS.
"""

from __future__ import annotations

import math
import re
import zlib
from typing import Sequence


class StubModel:
    """Byte-level tokenizer with hash-derived, properly normalized scores.

    Token ids are raw UTF-8 bytes (0..255); bos/eos sit just above the byte
    range so decode(encode(text)) == text holds for every unicode string.
    """

    bos_id = 256
    eos_id = 257

    def encode(self, text: str) -> list[int]:
        return list(text.encode("utf-8"))

    def decode(self, tokens: Sequence[int]) -> str:
        return bytes(tokens).decode("utf-8")

    def next_logprobs(
        self, context: str, prefix: Sequence[int], allowed: Sequence[int]
    ) -> list[float]:
        if not allowed:
            raise ValueError("allowed must not be empty")
        energies = [
            -(_mix("lm", context, *prefix, token) % 997) / 100.0 for token in allowed
        ]
        # Log-softmax over the allowed set: replies are real log-probabilities.
        peak = max(energies)
        lse = peak + math.log(sum(math.exp(e - peak) for e in energies))
        return [e - lse for e in energies]

    def span_scores(
        self, query: str, context: str
    ) -> tuple[list[tuple[int, int]], list[float], list[float]]:
        spans = [(m.start(), m.end()) for m in re.finditer(r"\S+", context)]
        start = [
            -(_mix("start", query, s, e, context[s:e]) % 997) / 100.0 for s, e in spans
        ]
        end = [
            -(_mix("end", query, s, e, context[s:e]) % 997) / 100.0 for s, e in spans
        ]
        return spans, start, end


def _mix(*parts) -> int:
    """Deterministic 32-bit digest of the request features."""
    return zlib.crc32("\x1f".join(str(p) for p in parts).encode("utf-8"))


MODELS = {"stub": StubModel}


def load_model(name: str):
    try:
        return MODELS[name]()
    except KeyError:
        known = ", ".join(sorted(MODELS))
        raise ValueError(f"unknown model {name!r} (available: {known})") from None
