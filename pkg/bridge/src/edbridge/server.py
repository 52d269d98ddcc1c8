"""Scorer server: newline-delimited UTF-8 JSON requests, one at a time.

Protocol v1. Requests carry an "op" field:

    {"op": "handshake"}                          -> {"ok": true, "version": 1, "modes": [...]}
    {"op": "encode", "text": s}                  -> {"tokens": [ints]}
    {"op": "decode", "tokens": [ints]}           -> {"text": s}
    {"op": "special", "which": "bos"|"eos"}      -> {"id": int}
    {"op": "next_logprobs", "context": s,
     "prefix": [ints], "allowed": [ints]}        -> {"logprobs": [reals aligned with allowed]}
    {"op": "span_scores", "query": s,
     "context": s}                               -> {"spans": [[start, end], ...],
                                                     "start": [reals], "end": [reals]}

Any failure is answered with {"error": reason}; the process keeps serving.
The loop runs over stdin/stdout by default; --tcp mirrors the same protocol
on a socket, one connection at a time.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from typing import IO, Sequence

from .model import load_model

PROTOCOL_VERSION = 1

MODE_SETS = {
    "generative": ("generative",),
    "extractive": ("extractive",),
    "both": ("generative", "extractive"),
}


def _text_field(request: dict, name: str) -> str:
    value = request.get(name)
    if not isinstance(value, str):
        raise ValueError(f'"{name}" must be a string')
    return value


def _ids_field(request: dict, name: str) -> list[int]:
    value = request.get(name)
    if not isinstance(value, list) or not all(
        isinstance(t, int) and not isinstance(t, bool) for t in value
    ):
        raise ValueError(f'"{name}" must be an array of integers')
    return value


def handle_request(model, modes: Sequence[str], request) -> dict:
    if not isinstance(request, dict) or not isinstance(request.get("op"), str):
        return {"error": 'request must be an object with a string "op" field'}
    op = request["op"]
    try:
        if op == "handshake":
            return {"ok": True, "version": PROTOCOL_VERSION, "modes": list(modes)}
        if op == "encode":
            return {"tokens": model.encode(_text_field(request, "text"))}
        if op == "decode":
            return {"text": model.decode(_ids_field(request, "tokens"))}
        if op == "special":
            which = request.get("which")
            if which == "bos":
                return {"id": model.bos_id}
            if which == "eos":
                return {"id": model.eos_id}
            return {"error": f"unknown special token {which!r}"}
        if op == "next_logprobs":
            if "generative" not in modes:
                return {"error": "generative scoring is disabled"}
            logprobs = model.next_logprobs(
                _text_field(request, "context"),
                _ids_field(request, "prefix"),
                _ids_field(request, "allowed"),
            )
            return {"logprobs": logprobs}
        if op == "span_scores":
            if "extractive" not in modes:
                return {"error": "extractive scoring is disabled"}
            spans, start, end = model.span_scores(
                _text_field(request, "query"), _text_field(request, "context")
            )
            return {"spans": [[s, e] for s, e in spans], "start": start, "end": end}
        return {"error": f"unknown op {op!r}"}
    except (KeyError, TypeError, ValueError) as exc:
        return {"error": str(exc) or type(exc).__name__}


def serve(model, modes: Sequence[str], rfile: IO[str], wfile: IO[str]) -> None:
    """Answer requests until end-of-input; errors never terminate the loop."""
    for line in rfile:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except ValueError as exc:
            reply = {"error": f"invalid JSON: {exc}"}
        else:
            reply = handle_request(model, modes, request)
        wfile.write(json.dumps(reply, ensure_ascii=False) + "\n")
        wfile.flush()


def serve_tcp(model, modes: Sequence[str], host: str, port: int) -> None:
    with socket.create_server((host, port)) as listener:
        bound_port = listener.getsockname()[1]
        print(f"edbridge: listening on {host}:{bound_port}", file=sys.stderr, flush=True)
        while True:
            conn, _ = listener.accept()
            with conn:
                rfile = conn.makefile("r", encoding="utf-8", newline="\n")
                wfile = conn.makefile("w", encoding="utf-8", newline="\n")
                with rfile, wfile:
                    serve(model, modes, rfile, wfile)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="edbridge", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--model", default="stub", help="name of the model to host")
    parser.add_argument("--mode", choices=sorted(MODE_SETS), default="both")
    parser.add_argument("--tcp", type=int, metavar="PORT",
                        help="serve on a TCP port instead of stdio (0 picks one)")
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)

    try:
        model = load_model(args.model)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    modes = MODE_SETS[args.mode]

    if args.tcp is not None:
        try:
            serve_tcp(model, modes, args.host, args.tcp)
        except KeyboardInterrupt:
            pass
        return 0
    stdout = sys.stdout
    if hasattr(stdout, "reconfigure"):
        stdout.reconfigure(encoding="utf-8")
        sys.stdin.reconfigure(encoding="utf-8")
    serve(model, modes, sys.stdin, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
