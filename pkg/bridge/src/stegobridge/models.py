"""Toy-scale stand-ins for the real translation model pair.

The production deployment wraps a forward translator (source language to
pivot language, decoded once per session with beam search, beam size 4)
and a back-translator whose per-step decoding distribution over the shared
vocabulary is what the protocol serves. Training those models is a
documented procedure, not part of this package; these stubs are exact
drop-ins interface-wise and fully deterministic so protocol transcripts
can be frozen and replayed.
"""

import hashlib
import random


class TranslationError(Exception):
    """A model failed on one input; callers log and skip the line."""


class StubEn2Ge:
    """Deterministic forward 'translator': same source, same pivot, always.

    The pivot is a reversible word-order transform tagged per word, which
    keeps sessions distinguishable without any model weights.
    """

    def __init__(self, beam_size: int = 4):
        self.beam_size = beam_size

    def translate(self, source: str) -> str:
        words = source.split()
        if not words:
            raise TranslationError("empty source text")
        return " ".join(f"{w}'" for w in reversed(words))


class StubGe2En:
    """Deterministic back-translation distribution over a fixed vocabulary.

    Every (pivot, prefix) pair maps to a pseudorandom but reproducible
    probability vector: the pair seeds a PRNG via SHA-256, so identical
    requests yield identical distributions across processes and runs.
    """

    def __init__(self, vocab_size: int):
        if vocab_size < 2:
            raise ValueError("vocabulary must have at least two tokens")
        self.vocab_size = vocab_size

    def distribution(self, pivot: str, prefix: tuple[int, ...]) -> list[float]:
        seed = hashlib.sha256(
            f"{pivot}\x1f{','.join(map(str, prefix))}".encode("utf-8")
        ).digest()
        rng = random.Random(seed)
        weights = [rng.random() + 1e-6 for _ in range(self.vocab_size)]
        total = sum(weights)
        return [w / total for w in weights]
