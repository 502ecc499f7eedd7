"""BPE subword tokenization with deterministic training and round-trip decode.

Conventions:
  - word-internal subwords carry a trailing continuation marker (default "@@");
    word-final subwords carry none, so detokenization is unambiguous.
  - reserved tokens: "<eos>" (end of sequence, never emitted by encode) and
    "<unk>" (unknown characters/words in non-strict mode).
  - merge training breaks frequency ties by lexicographically smallest pair;
    encoding applies merge rules in rule order, leftmost occurrence first.

A word-level mode (whitespace tokens, no merges) is supported behind a flag.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyCorpus, ParseError, UnknownTokenId, UnrepresentableInput

EOS = "<eos>"
UNK = "<unk>"
DEFAULT_MARKER = "@@"


def _merged_symbol(left: str, right: str, marker: str) -> str:
    core = left[: -len(marker)] if left.endswith(marker) else left
    return core + right


def _word_symbols(word: str, marker: str) -> tuple[str, ...]:
    if len(word) == 1:
        return (word,)
    return tuple(c + marker for c in word[:-1]) + (word[-1],)


def _apply_merges(
    symbols: tuple[str, ...], merges: Sequence[tuple[str, str]], marker: str
) -> tuple[str, ...]:
    seq = list(symbols)
    for left, right in merges:
        if len(seq) < 2:
            break
        out = []
        i = 0
        while i < len(seq):
            if i + 1 < len(seq) and seq[i] == left and seq[i + 1] == right:
                out.append(_merged_symbol(left, right, marker))
                i += 2
            else:
                out.append(seq[i])
                i += 1
        seq = out
    return tuple(seq)


@dataclass
class BpeModel:
    """Immutable trained model: ordered merge rules plus a dense vocabulary."""

    merges: list[tuple[str, str]]
    vocab: list[str]
    marker: str = DEFAULT_MARKER
    word_level: bool = False
    _ids: dict[str, int] = field(init=False, repr=False)
    _cache: dict[str, tuple[int, ...]] = field(init=False, repr=False)
    _alphabet: set[str] = field(init=False, repr=False)

    def __post_init__(self):
        if len(set(self.vocab)) != len(self.vocab):
            raise ParseError("duplicate token in vocabulary")
        if EOS not in self.vocab:
            raise ParseError(f"vocabulary lacks {EOS}")
        self._ids = {tok: i for i, tok in enumerate(self.vocab)}
        self._cache = {}
        self._alphabet = set()
        if not self.word_level:
            for tok in self.vocab:
                core = tok[: -len(self.marker)] if tok.endswith(self.marker) else tok
                if len(core) == 1:
                    self._alphabet.add(core)

    @property
    def size(self) -> int:
        return len(self.vocab)

    @property
    def eos_id(self) -> int:
        return self._ids[EOS]

    @property
    def unk_id(self) -> int | None:
        return self._ids.get(UNK)

    def token(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.vocab):
            raise UnknownTokenId(f"token id {token_id} out of range")
        return self.vocab[token_id]

    def token_id(self, token: str) -> int | None:
        return self._ids.get(token)

    def _encode_word(self, word: str, strict: bool) -> tuple[int, ...]:
        if self.word_level:
            tid = self._ids.get(word)
            if tid is None or word in (EOS, UNK):
                if strict:
                    raise UnrepresentableInput(f"word not in vocabulary: {word!r}")
                tid = self._ids[UNK]
            return (tid,)
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = []
        for sym in _word_symbols(word, self.marker):
            core = sym[: -len(self.marker)] if sym.endswith(self.marker) else sym
            if core in self._alphabet:
                symbols.append(sym)
            elif strict:
                raise UnrepresentableInput(f"character not in base alphabet: {core!r}")
            else:
                symbols.append(UNK)
        ids = tuple(
            self._ids[s] if s != UNK else self._ids[UNK]
            for s in _apply_merges(tuple(symbols), self.merges, self.marker)
        )
        self._cache[word] = ids
        return ids


def train_bpe(
    corpus: Iterable[str],
    num_merges: int,
    marker: str = DEFAULT_MARKER,
    word_level: bool = False,
) -> BpeModel:
    """Learn merge rules by repeatedly merging the most frequent adjacent pair.

    Ties break on the lexicographically smallest pair so training is
    reproducible. At most ``num_merges`` rules are learned; training stops
    early once no adjacent pair occurs anywhere.
    """
    if num_merges < 0:
        raise ValueError("num_merges must be >= 0")
    word_counts: Counter[str] = Counter()
    seen_any = False
    for line in corpus:
        seen_any = True
        word_counts.update(line.split())
    if not seen_any or not word_counts:
        raise EmptyCorpus("training corpus has no words")

    if word_level:
        vocab = sorted(word_counts) + [EOS, UNK]
        vocab.sort()
        return BpeModel(merges=[], vocab=vocab, marker=marker, word_level=True)

    words = {w: _word_symbols(w, marker) for w in word_counts}
    merges: list[tuple[str, str]] = []
    for _ in range(num_merges):
        pair_counts: Counter[tuple[str, str]] = Counter()
        for w, symbols in words.items():
            n = word_counts[w]
            for a, b in zip(symbols, symbols[1:]):
                pair_counts[(a, b)] += n
        if not pair_counts:
            break
        top = max(pair_counts.values())
        best = min(p for p, c in pair_counts.items() if c == top)
        merges.append(best)
        words = {w: _apply_merges(s, [best], marker) for w, s in words.items()}

    symbols = set()
    for w in word_counts:
        for sym in _word_symbols(w, marker):
            symbols.add(sym)
    for left, right in merges:
        symbols.add(_merged_symbol(left, right, marker))
    vocab = sorted(symbols | {EOS, UNK})
    return BpeModel(merges=merges, vocab=vocab, marker=marker, word_level=False)


def encode(model: BpeModel, text: str, strict: bool = False) -> list[int]:
    """Deterministically segment ``text`` into token ids. Never emits <eos>."""
    ids: list[int] = []
    for word in text.split():
        ids.extend(model._encode_word(word, strict))
    return ids


def decode(model: BpeModel, tokens: Sequence[int]) -> str:
    """Join subwords back into whitespace-normalized text, stripping <eos>."""
    words: list[str] = []
    current = ""
    for tid in tokens:
        tok = model.token(tid)
        if tok == EOS:
            continue
        if model.word_level:
            words.append(tok)
        elif tok.endswith(model.marker) and tok not in (EOS, UNK):
            current += tok[: -len(model.marker)]
        else:
            words.append(current + tok)
            current = ""
    if current:
        words.append(current)
    return " ".join(words)


@dataclass(frozen=True)
class FrequencyTable:
    """Occurrence count per token id over a BPE-encoded corpus."""

    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def sorted_ids(self) -> list[int]:
        """Token ids in non-increasing frequency order, ascending-id tiebreak."""
        return sorted(range(len(self.counts)), key=lambda i: (-self.counts[i], i))


def count_frequencies(model: BpeModel, corpus: Iterable[str]) -> FrequencyTable:
    counts = [0] * model.size
    for line in corpus:
        for tid in encode(model, line):
            counts[tid] += 1
    return FrequencyTable(tuple(counts))


# --- file formats ---

def save_model(model: BpeModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = f"bpe-v1 marker={model.marker}"
        if model.word_level:
            header += " mode=word"
        fh.write(header + "\n")
        for left, right in model.merges:
            fh.write(f"{left}\t{right}\n")
        fh.write("#vocab\n")
        for i, tok in enumerate(model.vocab):
            fh.write(f"{tok}\t{i}\n")


def load_model(path) -> BpeModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("bpe-v1 "):
        raise ParseError("not a bpe-v1 model file", line=1)
    fields = dict(
        part.split("=", 1) for part in lines[0].split()[1:] if "=" in part
    )
    marker = fields.get("marker", DEFAULT_MARKER)
    word_level = fields.get("mode") == "word"
    merges: list[tuple[str, str]] = []
    vocab_entries: list[tuple[str, int]] = []
    section = "merges"
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        if line == "#vocab":
            section = "vocab"
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected two tab-separated fields", line=lineno)
        if section == "merges":
            merges.append((parts[0], parts[1]))
        else:
            try:
                vocab_entries.append((parts[0], int(parts[1])))
            except ValueError:
                raise ParseError("bad token id", line=lineno)
    if not vocab_entries:
        raise ParseError("missing #vocab section")
    ids = sorted(i for _, i in vocab_entries)
    if ids != list(range(len(vocab_entries))):
        raise ParseError("token ids not dense 0..m-1")
    vocab = [""] * len(vocab_entries)
    for tok, i in vocab_entries:
        vocab[i] = tok
    return BpeModel(merges=merges, vocab=vocab, marker=marker, word_level=word_level)


def save_frequencies(freqs: FrequencyTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, c in enumerate(freqs.counts):
            fh.write(f"{i}\t{c}\n")


def load_frequencies(path) -> FrequencyTable:
    counts: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected '<id>\\t<count>'", line=lineno)
            counts[int(parts[0])] = int(parts[1])
    if sorted(counts) != list(range(len(counts))):
        raise ParseError("token ids not dense 0..m-1")
    return FrequencyTable(tuple(counts[i] for i in range(len(counts))))
