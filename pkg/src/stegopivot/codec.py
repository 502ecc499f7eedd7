"""Step-controlled stego generation and extraction.

Embedding walks the provider token by token. Counting generated tokens from
1, a position is bit-carrying when it equals the next scheduled carry index
(1, then previous+s) and framed bits remain; there the token is chosen by
constrained argmax over the bin matching the next l bits. Every other
position is greedy. While bits remain, <eos> is kept out of the greedy
choice (stopping early would lose payload; the multi-text batch path relaxes
this). After the payload is exhausted generation is pure greedy and stops at
<eos> or the token cap.

In common-token mode a NONE token may win a carrying position; it consumes
no bits and the very next position carries instead. Extraction mirrors the
same position arithmetic from the re-encoded surface text alone.

Framing: header32 prefixes the payload with its 32-bit big-endian bit
length, embedded through the same channel; raw embeds the payload bits
as-is and needs the bit length out of band. Either way the framed stream
is padded with '0' to a multiple of l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bins import BIN_NONE, BinAssignment, bits_of
from .errors import (
    BadHeader,
    MissingLength,
    ParamMismatch,
    PayloadTooLarge,
    RoundTripUnsafe,
    TruncatedPayload,
)
from .keys import SecretKey
from .lm import GenerationContext, constrained_token, greedy_token
from .tokenizer import BpeModel, decode, encode

HEADER_BITS = 32


def bytes_to_bits(data: bytes) -> str:
    """MSB-first bit string of a byte sequence."""
    return "".join(format(b, "08b") for b in data)


def bits_to_bytes(bits: str) -> bytes:
    if len(bits) % 8:
        raise ValueError("bit count not a multiple of 8")
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


@dataclass(frozen=True)
class StegoParams:
    """Shared embedding parameters; s=None with l=0 is zero-bit mode."""

    s: int | None
    l: int
    framing: str = "header32"
    max_tokens: int = 1024
    key: SecretKey | None = None

    def __post_init__(self):
        if (self.s is None) != (self.l == 0):
            raise ParamMismatch("zero-bit mode requires s=None and l=0 together")
        if self.s is not None and self.s < 1:
            raise ParamMismatch("step must be >= 1")
        if self.s is not None and self.l < 1:
            raise ParamMismatch("bits per token must be >= 1")
        if self.framing not in ("header32", "raw"):
            raise ParamMismatch(f"unknown framing {self.framing!r}")
        if self.max_tokens < 1:
            raise ParamMismatch("max_tokens must be >= 1")

    @property
    def zero_bit(self) -> bool:
        return self.l == 0


class BitStream:
    """Ordered bits with a read cursor; frames are consecutive slices."""

    def __init__(self, bits: str):
        self.bits = bits
        self.cursor = 0

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.cursor

    def peek(self, n: int) -> str:
        return self.bits[self.cursor:self.cursor + n]

    def advance(self, n: int) -> None:
        self.cursor += n

    def take(self, n: int) -> str:
        out = self.peek(n)
        self.advance(n)
        return out


@dataclass(frozen=True)
class StegoText:
    """One generated stego text; ``tokens`` always ends in <eos>."""

    tokens: tuple[int, ...]
    surface: str
    embedded_bit_count: int


def frame_payload(payload_bits: str, framing: str, l: int) -> str:
    """Apply framing and pad with '0' to a multiple of l."""
    if framing == "header32":
        if len(payload_bits) >= 1 << HEADER_BITS:
            raise PayloadTooLarge("payload too long for a 32-bit length header")
        stream = format(len(payload_bits), f"0{HEADER_BITS}b") + payload_bits
    else:
        stream = payload_bits
    if l > 0 and stream and len(stream) % l:
        stream += "0" * (l - len(stream) % l)
    return stream


def _as_bits(payload) -> str:
    if isinstance(payload, (bytes, bytearray)):
        return bytes_to_bits(bytes(payload))
    if isinstance(payload, str):
        if set(payload) - {"0", "1"}:
            raise ValueError("payload string must contain only '0'/'1'")
        return payload
    raise TypeError("payload must be bytes or a bit string")


_non_eos_cache: dict[tuple[int, int], np.ndarray] = {}


def _greedy_non_eos(dist, eos_id: int) -> int:
    key = (dist.size, eos_id)
    ids = _non_eos_cache.get(key)
    if ids is None:
        ids = np.asarray(
            [i for i in range(dist.size) if i != eos_id], dtype=np.int64
        )
        _non_eos_cache[key] = ids
    from . import _kernels

    return _kernels.argmax_subset(dist.probs, ids)


def _sparse_constrained(provider, ctx, f: BinAssignment, bits: str,
                        include_none: bool) -> int:
    """Try the sparse top-k response; re-request dense if the bin is absent."""
    top = provider.next_sparse(ctx)
    wanted = set(f.candidates_for(bits))
    if include_none:
        wanted |= set(f.none_tokens())
    hits = [(tid, p) for tid, p in top if tid in wanted]
    if hits:
        best_p = max(p for _, p in hits)
        return min(tid for tid, p in hits if p == best_p)
    return constrained_token(provider.next_distribution(ctx), f, bits,
                             include_none)


def generate_stream(
    cover: str,
    reader: BitStream,
    params: StegoParams,
    f: BinAssignment | None,
    provider,
    model: BpeModel,
    allow_partial: bool = False,
) -> StegoText:
    """Generate one stego text, consuming framed bits from ``reader``.

    ``allow_partial`` is the multi-text escape hatch: a greedy <eos> may end
    the text with bits still unread (the caller continues in the next text)
    and hitting the token cap is not an error.
    """
    if not params.zero_bit:
        if f is None:
            raise ParamMismatch("bin assignment required unless in zero-bit mode")
        if f.l != params.l:
            raise ParamMismatch(f"params.l={params.l} but bins carry l={f.l}")
    include_none = f is not None and f.scheme == "bins-common"
    sparse = getattr(provider, "prefers_sparse", False)
    eos_id = model.eos_id
    tokens: list[int] = []
    consumed = 0
    position = 1
    next_carry = 1

    while True:
        if len(tokens) >= params.max_tokens:
            if reader.remaining and not allow_partial:
                raise PayloadTooLarge(
                    f"{reader.remaining} bits left at max_tokens={params.max_tokens}"
                )
            tokens.append(eos_id)
            break
        ctx = GenerationContext(source=cover, prefix=tuple(tokens))
        carrying = (
            not params.zero_bit and reader.remaining > 0 and position == next_carry
        )
        if carrying:
            bits = reader.peek(params.l)
            if sparse:
                tok = _sparse_constrained(provider, ctx, f, bits, include_none)
            else:
                tok = constrained_token(
                    provider.next_distribution(ctx), f, bits, include_none
                )
            if f.assignment[tok] == BIN_NONE:
                next_carry = position + 1  # nothing embedded, retry right away
            else:
                reader.advance(params.l)
                consumed += params.l
                next_carry = position + params.s
        else:
            dist = provider.next_distribution(ctx)
            if reader.remaining and not params.zero_bit and not allow_partial:
                tok = _greedy_non_eos(dist, eos_id)
            else:
                tok = greedy_token(dist)
            if tok == eos_id:
                tokens.append(eos_id)
                break
        tokens.append(tok)
        position += 1

    surface = decode(model, tokens)
    if encode(model, surface) != tokens[:-1]:
        raise RoundTripUnsafe("surface text does not re-encode to generated tokens")
    return StegoText(tokens=tuple(tokens), surface=surface,
                     embedded_bit_count=consumed)


def embed(
    cover: str,
    payload,
    params: StegoParams,
    f: BinAssignment | None,
    provider,
    model: BpeModel,
) -> StegoText:
    """Embed the whole framed payload into a single stego text."""
    payload_bits = "" if params.zero_bit else _as_bits(payload)
    stream = "" if params.zero_bit else frame_payload(
        payload_bits, params.framing, params.l
    )
    return generate_stream(cover, BitStream(stream), params, f, provider, model)


def generate_zero_bit(cover: str, provider, model: BpeModel,
                      max_tokens: int = 1024) -> StegoText:
    """Pure greedy generation; carries nothing."""
    params = StegoParams(s=None, l=0, max_tokens=max_tokens)
    return generate_stream(cover, BitStream(""), params, None, provider, model)


def iter_carried_frames(tokens, params: StegoParams, f: BinAssignment):
    """Yield the l-bit frames read at carrying positions of one token sequence.

    A NONE token at a carrying position yields nothing and shifts the carry
    to the immediately following position (common-token rule).
    """
    next_carry = 1
    for position, tid in enumerate(tokens, start=1):
        if position != next_carry:
            continue
        bits = bits_of(f, tid)
        if bits:
            next_carry = position + params.s
            yield bits
        else:
            next_carry = position + 1


def extract(
    stego_surface: str,
    params: StegoParams,
    f: BinAssignment,
    model: BpeModel,
    declared_bit_length: int | None = None,
) -> str:
    """Recover the payload bits from the surface text alone."""
    if params.zero_bit:
        return ""
    if f.l != params.l:
        raise ParamMismatch(f"params.l={params.l} but bins carry l={f.l}")
    tokens = encode(model, stego_surface)
    collected = ""
    frames = iter_carried_frames(tokens, params, f)

    if params.framing == "header32":
        for bits in frames:
            collected += bits
            if len(collected) >= HEADER_BITS:
                break
        if len(collected) < HEADER_BITS:
            raise BadHeader("text ends inside the 32-bit length header")
        declared = int(collected[:HEADER_BITS], 2)
        needed = HEADER_BITS + declared
    else:
        if declared_bit_length is None:
            raise MissingLength("raw framing needs declared_bit_length")
        declared = declared_bit_length
        needed = declared

    for bits in frames:
        if len(collected) >= needed:
            break
        collected += bits
    if len(collected) < needed:
        raise TruncatedPayload(
            f"needed {needed} bits, text carries only {len(collected)}"
        )
    start = HEADER_BITS if params.framing == "header32" else 0
    return collected[start:needed]
