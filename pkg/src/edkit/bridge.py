"""Client for external scorer processes speaking the JSON-lines protocol.

The bridge is any subprocess that answers newline-delimited UTF-8 JSON
requests on stdin/stdout, one request in flight at a time:

    {"op": "handshake"}                          -> {"ok": true, "version": 1, "modes": [...]}
    {"op": "encode", "text": s}                  -> {"tokens": [ints]}
    {"op": "decode", "tokens": [ints]}           -> {"text": s}
    {"op": "special", "which": "bos"|"eos"}      -> {"id": int}
    {"op": "next_logprobs", "context": s,
     "prefix": [ints], "allowed": [ints]}        -> {"logprobs": [floats aligned with allowed]}
    {"op": "span_scores", "query": s,
     "context": s}                               -> {"spans": [[s,e],...], "start": [...], "end": [...]}
    any failure                                  -> {"error": reason}

The client implements the Tokenizer, TokenScorer and SpanScorer contracts,
so trained checkpoints drive both decoders through one connection. Tries
are built through this tokenizer whenever the bridge is the scorer, which
keeps trie tokens and model tokens consistent by construction.
"""

from __future__ import annotations

import json
import subprocess
import threading
from typing import Sequence

from .errors import BridgeError

PROTOCOL_VERSION = 1


class BridgeProcess:
    """One scorer subprocess; requests are serialized by an internal lock."""

    def __init__(self, argv: Sequence[str]):
        if not argv:
            raise BridgeError("empty bridge command")
        self.argv = list(argv)
        try:
            self._proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"cannot start bridge {self.argv!r}: {exc}") from exc
        self._lock = threading.Lock()
        self.modes: tuple[str, ...] = ()
        self.version: int | None = None
        self.bos_id: int = -1
        self.eos_id: int = -1
        self._connect()

    def _connect(self) -> None:
        reply = self.request({"op": "handshake"})
        if not reply.get("ok"):
            raise BridgeError(f"bridge handshake refused: {reply!r}")
        self.version = reply.get("version")
        if self.version != PROTOCOL_VERSION:
            raise BridgeError(f"unsupported bridge protocol version {self.version!r}")
        self.modes = tuple(reply.get("modes", ()))
        self.bos_id = int(self.request({"op": "special", "which": "bos"})["id"])
        self.eos_id = int(self.request({"op": "special", "which": "eos"})["id"])

    def supports(self, mode: str) -> bool:
        return mode in self.modes

    def request(self, payload: dict) -> dict:
        with self._lock:
            if self._proc.poll() is not None:
                raise BridgeError(f"bridge process exited with code {self._proc.returncode}")
            assert self._proc.stdin is not None and self._proc.stdout is not None
            try:
                self._proc.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
                self._proc.stdin.flush()
                line = self._proc.stdout.readline()
            except OSError as exc:
                raise BridgeError(f"bridge i/o failed: {exc}") from exc
        if not line:
            raise BridgeError("bridge closed its output stream")
        try:
            reply = json.loads(line)
        except ValueError as exc:
            raise BridgeError(f"bridge sent invalid JSON: {line!r}") from exc
        if not isinstance(reply, dict):
            raise BridgeError(f"bridge sent a non-object reply: {reply!r}")
        if "error" in reply:
            raise BridgeError(f"bridge error: {reply['error']}")
        return reply

    # Tokenizer contract
    def encode(self, text: str) -> list[int]:
        return [int(t) for t in self.request({"op": "encode", "text": text})["tokens"]]

    def decode(self, ids: Sequence[int]) -> str:
        return self.request({"op": "decode", "tokens": list(ids)})["text"]

    # TokenScorer contract
    def next_logprobs(
        self, marked_context: str, prefix: Sequence[int], allowed: Sequence[int]
    ) -> dict[int, float]:
        allowed_list = list(allowed)
        reply = self.request(
            {"op": "next_logprobs", "context": marked_context, "prefix": list(prefix), "allowed": allowed_list}
        )
        logprobs = reply["logprobs"]
        if len(logprobs) != len(allowed_list):
            raise BridgeError(
                f"bridge returned {len(logprobs)} logprobs for {len(allowed_list)} allowed ids"
            )
        return {t: float(lp) for t, lp in zip(allowed_list, logprobs)}

    # SpanScorer contract
    def span_scores(
        self, query: str, context: str
    ) -> tuple[list[tuple[int, int]], list[float], list[float]]:
        reply = self.request({"op": "span_scores", "query": query, "context": context})
        spans = [(int(s), int(e)) for s, e in reply["spans"]]
        return spans, [float(x) for x in reply["start"]], [float(x) for x in reply["end"]]

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin is not None:
                try:
                    self._proc.stdin.close()
                except OSError:
                    pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "BridgeProcess":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
