"""Reader for the shared tokenizer-model file format.

The codec and the bridge agree on vocabulary ids through a `bpe-v1` text
file (header line, tab-separated merges, then a `#vocab` section of
`token\tid` lines). The bridge only needs the vocabulary list; merges are
skipped. Both sides hash the vocabulary the same way to detect drift at
handshake time.
"""

import hashlib


def load_vocab(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("bpe-v1 "):
        raise ValueError(f"{path}: not a bpe-v1 model file")
    entries: list[tuple[str, int]] = []
    in_vocab = False
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        if line == "#vocab":
            in_vocab = True
            continue
        if not in_vocab:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected token<TAB>id")
        entries.append((parts[0], int(parts[1])))
    if not entries:
        raise ValueError(f"{path}: missing #vocab section")
    ids = sorted(i for _, i in entries)
    if ids != list(range(len(entries))):
        raise ValueError(f"{path}: token ids not dense 0..m-1")
    vocab = [""] * len(entries)
    for tok, i in entries:
        vocab[i] = tok
    return vocab


def vocab_hash(vocab: list[str]) -> str:
    """Hash both sides use to agree they share a vocabulary, id for id."""
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()
