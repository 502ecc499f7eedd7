"""Token-distribution providers and the two selection rules.

Providers emit a normalized probability vector over the vocabulary for the
next token given a generation context. The built-in backend is an add-k
smoothed n-gram model with backoff to shorter contexts; it deliberately
ignores the context's ``source`` field (conditioning on a pivot text is the
remote bridge's job, NOT emulated here). The remote client speaks the
newline-delimited JSON bridge protocol.

Selection is always argmax with a lowest-token-id tiebreak; providers must
emit exact zeros rather than denormals so the tiebreak is platform-stable.
"""

from __future__ import annotations

import hashlib
import json
import socket
import weakref
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .bins import BinAssignment
from .errors import EmptyBin, EmptyCorpus, ProviderUnavailable
from .tokenizer import BpeModel, encode

_BOS = -1  # context padding for positions before the first token

PROTOCOL_VERSION = 1


def vocab_hash(vocab: Sequence[str]) -> str:
    """Hash both sides use to agree they share a vocabulary, id for id."""
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Distribution:
    """Probability vector over the vocabulary at one generation step."""

    probs: np.ndarray

    def validate(self) -> None:
        if np.any(np.isnan(self.probs)) or np.any(self.probs < 0):
            raise ValueError("distribution has NaN or negative entries")
        if abs(float(self.probs.sum()) - 1.0) > 1e-9:
            raise ValueError("distribution does not sum to 1")

    @property
    def size(self) -> int:
        return int(self.probs.shape[0])


@dataclass(frozen=True)
class GenerationContext:
    """Conditioning for one step: opaque source text plus the prefix so far."""

    source: str = ""
    prefix: tuple[int, ...] = ()


class NgramProvider:
    """Add-k smoothed n-gram model with backoff to shorter contexts.

    The longest context with any observations is used; with zero training
    data every distribution is uniform. ``exclude_ids`` (e.g. the <unk> id
    at embed time) get exactly zero probability, with the rest renormalized.
    """

    def __init__(self, size: int, order: int, k: float,
                 tables: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray, float]],
                 exclude_ids: tuple[int, ...] = ()):
        self.size = size
        self.order = order
        self.k = k
        self._tables = tables
        self._exclude = np.asarray(sorted(exclude_ids), dtype=np.int64)
        self._empty = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), 0.0)

    def with_exclusions(self, exclude_ids: Iterable[int]) -> "NgramProvider":
        return NgramProvider(self.size, self.order, self.k, self._tables,
                             tuple(exclude_ids))

    def next_distribution(self, ctx: GenerationContext) -> Distribution:
        padded = (_BOS,) * (self.order - 1) + tuple(ctx.prefix)
        entry = self._empty
        for clen in range(self.order - 1, -1, -1):
            key = padded[len(padded) - clen:]
            hit = self._tables.get(key)
            if hit is not None:
                entry = hit
                break
        ids, counts, total = entry
        out = np.empty(self.size, dtype=np.float64)
        _kernels.add_k_fill(out, ids, counts, total, self.k)
        if self._exclude.shape[0]:
            _kernels.renormalize_excluding(out, self._exclude)
        return Distribution(out)


def train_ngram(
    model: BpeModel,
    corpus: Iterable[str],
    order: int = 3,
    k: float = 1.0,
) -> NgramProvider:
    """Count all context lengths < order over the encoded corpus (+<eos>)."""
    if not 1 <= order <= 5:
        raise ValueError("order must be in 1..5")
    if k <= 0:
        raise ValueError("add-k smoothing needs k > 0")
    raw: dict[tuple[int, ...], Counter] = {}
    seen_any = False
    for line in corpus:
        ids = encode(model, line)
        if not ids and not line.split():
            continue
        seen_any = True
        seq = [_BOS] * (order - 1) + ids + [model.eos_id]
        for pos in range(order - 1, len(seq)):
            tok = seq[pos]
            for clen in range(order):
                ctx = tuple(seq[pos - clen:pos])
                raw.setdefault(ctx, Counter())[tok] += 1
    if not seen_any:
        raise EmptyCorpus("n-gram training corpus is empty")
    tables = {}
    for ctx, counter in raw.items():
        ids = np.asarray(sorted(counter), dtype=np.int64)
        counts = np.asarray([counter[i] for i in ids], dtype=np.float64)
        tables[ctx] = (ids, counts, float(counts.sum()))
    return NgramProvider(model.size, order, k, tables)


def greedy_token(dist: Distribution) -> int:
    """Unconstrained argmax; the lowest token id wins ties."""
    return int(np.argmax(dist.probs))


_cand_cache: "weakref.WeakKeyDictionary[BinAssignment, dict]" = (
    weakref.WeakKeyDictionary()
)


def _candidate_ids(f: BinAssignment, bits: str, include_none: bool) -> np.ndarray:
    cache = _cand_cache.setdefault(f, {})
    key = (bits, include_none)
    ids = cache.get(key)
    if ids is None:
        cands = f.candidates_for(bits)
        if include_none:
            cands = tuple(sorted(set(cands) | set(f.none_tokens())))
        ids = np.asarray(cands, dtype=np.int64)
        cache[key] = ids
    return ids


def constrained_token(
    dist: Distribution, f: BinAssignment, bits: str, include_none: bool = False
) -> int:
    """Argmax restricted to the bin carrying ``bits``.

    With ``include_none`` (common-token mode) the NONE-marked tokens are
    also candidates; choosing one embeds nothing. A zero-mass bin still
    yields its lowest-id member rather than an error, so generation never
    deadlocks.
    """
    if len(bits) != f.l:
        raise ValueError(f"expected {f.l} bits, got {len(bits)}")
    ids = _candidate_ids(f, bits, include_none)
    if ids.shape[0] == 0:
        raise EmptyBin(f"no candidates for bits {bits!r}")
    return _kernels.argmax_subset(dist.probs, ids)


class RemoteProvider:
    """Client for the bridge wire protocol (one session per source text).

    The handshake-reported vocabulary hash must match the local BPE vocab,
    otherwise the provider is refused: side information only works when
    both ends index tokens identically.
    """

    def __init__(self, addr: str, vocab: Sequence[str], sparse_k: int = 0):
        host, _, port = addr.rpartition(":")
        try:
            self._sock = socket.create_connection((host or "127.0.0.1", int(port)))
        except OSError as exc:
            raise ProviderUnavailable(f"cannot reach bridge at {addr}: {exc}")
        self._fh = self._sock.makefile("rw", encoding="utf-8", newline="\n")
        self._sessions: dict[str, str] = {}
        self.sparse_k = sparse_k
        hello = self._call({"op": "hello", "version": PROTOCOL_VERSION})
        self.size = int(hello["vocab_size"])
        if hello["vocab_hash"] != vocab_hash(vocab):
            self.close()
            raise ProviderUnavailable("bridge vocabulary hash mismatch")

    @property
    def prefers_sparse(self) -> bool:
        return self.sparse_k > 0

    def _call(self, msg: dict) -> dict:
        try:
            self._fh.write(json.dumps(msg) + "\n")
            self._fh.flush()
            line = self._fh.readline()
        except OSError as exc:
            raise ProviderUnavailable(str(exc))
        if not line:
            raise ProviderUnavailable("bridge closed the connection")
        reply = json.loads(line)
        if "error" in reply:
            raise ProviderUnavailable(f"bridge error: {reply['error']}")
        return reply

    def _session(self, source: str) -> str:
        sid = self._sessions.get(source)
        if sid is None:
            reply = self._call({"op": "open", "source": source})
            sid = reply["session"]
            self._sessions[source] = sid
        return sid

    def next_distribution(self, ctx: GenerationContext) -> Distribution:
        reply = self._call({
            "op": "dist",
            "session": self._session(ctx.source),
            "prefix": list(ctx.prefix),
            "mode": "dense",
        })
        return Distribution(np.asarray(reply["probs"], dtype=np.float64))

    def next_sparse(self, ctx: GenerationContext) -> list[tuple[int, float]]:
        reply = self._call({
            "op": "dist",
            "session": self._session(ctx.source),
            "prefix": list(ctx.prefix),
            "mode": "sparse",
            "k": self.sparse_k,
        })
        return [(int(i), float(p)) for i, p in reply["top"]]

    def close(self) -> None:
        try:
            self._fh.close()
            self._sock.close()
        except OSError:
            pass
