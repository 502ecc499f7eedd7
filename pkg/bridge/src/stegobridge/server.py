"""Newline-delimited JSON protocol server.

One request per line, one response per line, version 1:

    {"op":"hello","version":1}              -> {"vocab_size":m,"vocab_hash":h}
    {"op":"open","source":text}             -> {"session":id,"pivot":text}
    {"op":"dist","session":id,"prefix":[..],
     "mode":"dense"}                        -> {"probs":[m floats]}
    {"op":"dist",...,"mode":"sparse","k":K} -> {"top":[[id,p],..],"rest_mass":r}
    {"op":"close","session":id}             -> {"ok":true}

Errors come back as {"error": code, "detail": text}; codes are
"bad-request", "version-mismatch", "unknown-session" and "model-failure".
Unknown request fields are ignored. Responses are serialized with sorted
keys and no whitespace so transcripts replay byte-identically.
"""

import argparse
import json
import logging
import socketserver
import sys
import threading

from .models import StubEn2Ge, StubGe2En, TranslationError
from .vocabfile import load_vocab, vocab_hash

PROTOCOL_VERSION = 1

log = logging.getLogger("stegobridge")


def dumps(reply: dict) -> str:
    return json.dumps(reply, sort_keys=True, separators=(",", ":"))


def _error(code: str, detail: str) -> dict:
    return {"error": code, "detail": detail}


class BridgeCore:
    """Shared, immutable state: the vocabulary and the model pair."""

    def __init__(self, vocab: list[str], en2ge=None, ge2en=None):
        self.vocab = list(vocab)
        self.hash = vocab_hash(self.vocab)
        self.en2ge = en2ge or StubEn2Ge()
        self.ge2en = ge2en or StubGe2En(len(self.vocab))

    @classmethod
    def from_model_file(cls, path) -> "BridgeCore":
        return cls(load_vocab(path))


class Connection:
    """Per-connection protocol state: open sessions, processed in order."""

    def __init__(self, core: BridgeCore):
        self.core = core
        self.sessions: dict[str, str] = {}  # session id -> pivot text
        self._next = 1

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return dumps(_error("bad-request", f"not valid JSON: {exc}"))
        if not isinstance(msg, dict) or "op" not in msg:
            return dumps(_error("bad-request", "message must carry an 'op'"))
        handler = getattr(self, f"_op_{msg['op']}", None)
        if handler is None:
            return dumps(_error("bad-request", f"unknown op {msg['op']!r}"))
        try:
            return dumps(handler(msg))
        except KeyError as exc:
            return dumps(_error("bad-request", f"missing field {exc}"))

    def _op_hello(self, msg: dict) -> dict:
        if msg["version"] != PROTOCOL_VERSION:
            return _error(
                "version-mismatch",
                f"server speaks version {PROTOCOL_VERSION}, got {msg['version']}",
            )
        return {"vocab_size": len(self.core.vocab), "vocab_hash": self.core.hash}

    def _op_open(self, msg: dict) -> dict:
        try:
            pivot = self.core.en2ge.translate(msg["source"])
        except TranslationError as exc:
            return _error("model-failure", str(exc))
        sid = f"s{self._next}"
        self._next += 1
        self.sessions[sid] = pivot
        return {"session": sid, "pivot": pivot}

    def _op_dist(self, msg: dict) -> dict:
        pivot = self.sessions.get(msg["session"])
        if pivot is None:
            return _error("unknown-session", f"no session {msg['session']!r}")
        prefix = tuple(int(t) for t in msg["prefix"])
        probs = self.core.ge2en.distribution(pivot, prefix)
        if msg.get("mode", "dense") == "sparse":
            k = int(msg["k"])
            if k < 1:
                return _error("bad-request", "sparse mode needs k >= 1")
            order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))[:k]
            top = [[i, probs[i]] for i in order]
            return {"top": top, "rest_mass": 1.0 - sum(probs[i] for i in order)}
        return {"probs": probs}

    def _op_close(self, msg: dict) -> dict:
        self.sessions.pop(msg["session"], None)
        return {"ok": True}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        conn = Connection(self.server.core)  # type: ignore[attr-defined]
        for raw in self.rfile:
            reply = conn.handle_line(raw.decode("utf-8"))
            self.wfile.write((reply + "\n").encode("utf-8"))


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(core: BridgeCore, host: str = "127.0.0.1", port: int = 0):
    """Start a threaded TCP server; returns (server, bound_port).

    The caller owns shutdown. Each connection gets its own session book;
    within a connection, requests are answered strictly in arrival order.
    """
    server = _Server((host, port), _Handler)
    server.core = core  # type: ignore[attr-defined]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]


def serve_stdio(core: BridgeCore, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    conn = Connection(core)
    for line in stdin:
        stdout.write(conn.handle_line(line) + "\n")
        stdout.flush()


def main(argv=None) -> int:
    logging.basicConfig(level="INFO")
    ap = argparse.ArgumentParser(prog="stegobridge")
    ap.add_argument("--models", required=True,
                    help="path to the shared bpe-v1 model file")
    ap.add_argument("--listen", default="127.0.0.1:7373",
                    help="host:port for TCP mode")
    ap.add_argument("--stdio", action="store_true",
                    help="serve one connection over stdin/stdout instead")
    args = ap.parse_args(argv)
    try:
        core = BridgeCore.from_model_file(args.models)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.stdio:
        serve_stdio(core)
        return 0
    host, _, port = args.listen.rpartition(":")
    server, bound = serve_tcp(core, host or "127.0.0.1", int(port))
    log.info("listening on %s:%d (vocab %d tokens)", host or "127.0.0.1",
             bound, len(core.vocab))
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
