"""Synonym sets and per-token substitution sets.

File format: one synset per line, surface forms separated by spaces.
Matching is case-sensitive and exact; multiword entries cannot occur because
the separator is whitespace. Subword pieces (tokens carrying the continuation
marker) and reserved tokens always get singleton substitution sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyFile, ParseError
from .tokenizer import EOS, UNK, BpeModel


@dataclass
class SynonymDB:
    """Loaded synsets plus a token -> synset-indices index."""

    synsets: list[frozenset[str]]
    index: dict[str, list[int]] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {}
        for i, synset in enumerate(self.synsets):
            if not synset:
                raise ParseError("empty synset")
            for tok in synset:
                self.index.setdefault(tok, []).append(i)

    def synonyms_of(self, token: str) -> set[str]:
        """Union of all synsets containing ``token`` (empty if unknown)."""
        out: set[str] = set()
        for i in self.index.get(token, ()):
            out |= self.synsets[i]
        return out


def load_synsets(path) -> SynonymDB:
    synsets: list[frozenset[str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            words = line.split()
            if not words:
                continue
            synsets.append(frozenset(words))
    if not synsets:
        raise EmptyFile(f"no synsets in {path}")
    return SynonymDB(synsets)


def save_synsets(db: SynonymDB, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for synset in db.synsets:
            fh.write(" ".join(sorted(synset)) + "\n")


@dataclass(frozen=True)
class SubstitutionSet:
    """Vocabulary tokens that may replace the anchor without changing meaning."""

    anchor: int
    members: frozenset[int]

    def __post_init__(self):
        assert self.anchor in self.members


def substitution_set(db: SynonymDB, model: BpeModel, token_id: int) -> SubstitutionSet:
    """All in-vocabulary tokens sharing a synset with ``token_id``, plus itself."""
    surface = model.token(token_id)
    members = {token_id}
    is_piece = not model.word_level and surface.endswith(model.marker)
    if surface not in (EOS, UNK) and not is_piece:
        for candidate in db.synonyms_of(surface):
            cid = model.token_id(candidate)
            if cid is not None and candidate not in (EOS, UNK):
                members.add(cid)
    return SubstitutionSet(anchor=token_id, members=frozenset(members))
