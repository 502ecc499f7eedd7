"""Reference distribution-provider bridge.

Serves step-wise decoding distributions from a pivot-translation model
pair over a newline-delimited JSON protocol, so a codec on the other end
of the wire can drive constrained generation without ever shipping the
model. The bridge only ever sees token prefixes, never payload bits.
"""

from .models import StubEn2Ge, StubGe2En, TranslationError
from .server import PROTOCOL_VERSION, BridgeCore, serve_tcp
from .vocabfile import load_vocab, vocab_hash

__all__ = [
    "PROTOCOL_VERSION",
    "BridgeCore",
    "StubEn2Ge",
    "StubGe2En",
    "TranslationError",
    "load_vocab",
    "serve_tcp",
    "vocab_hash",
]
