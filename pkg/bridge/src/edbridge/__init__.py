"""Scorer server for the newline-delimited JSON protocol (version 1).

The package hosts a model behind stdio (or TCP) so decoders in other
processes can tokenize with the model's own vocabulary and request
next-token log-probabilities or span scores over the same connection.
"""

from .model import MODELS, StubModel, load_model
from .server import PROTOCOL_VERSION, handle_request, main, serve, serve_tcp

__version__ = "0.1.0"

__all__ = [
    "MODELS",
    "PROTOCOL_VERSION",
    "StubModel",
    "handle_request",
    "load_model",
    "main",
    "serve",
    "serve_tcp",
]
