"""Vocabulary partitioning into bit-carrying bins.

Three construction schemes over a vocabulary of m tokens and 2**l bins:

  - sabins:      frequency-priority, synonym-spreading keyed assignment
  - bins:        keyed random even partition
  - bins-common: random even partition with the top-frequency tokens taken
                 out of play (they carry no bits and stay selectable)

<eos> always sits alone in the extra bin V_{2**l} and carries no bits.
<unk> is never assigned a bin and is never a selection candidate.
Bin index i maps to the big-endian l-bit binary string of i; the key
randomizes membership only, never the index-to-bits map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BinUnderfilled, InvariantViolation, MissingEos, ParseError
from .keys import SecretKey
from .synonyms import SynonymDB, substitution_set
from .tokenizer import EOS, UNK, BpeModel, FrequencyTable

BIN_NONE = -1  # carries no bits but is not <eos> (common tokens, <unk>)
BIN_EOS = -2

SCHEMES = ("sabins", "bins", "bins-common")


@dataclass(frozen=True)
class BinAssignment:
    """The shared side-information mapping f: token id -> bin index."""

    l: int
    assignment: tuple[int, ...]  # per token id: bin index, BIN_NONE or BIN_EOS
    vocab: tuple[str, ...]
    scheme: str
    key_fingerprint: str
    _bins: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)
    _none_ids: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bins: dict[int, list[int]] = {}
        none_ids: list[int] = []
        for tid, b in enumerate(self.assignment):
            if b >= 0:
                bins.setdefault(b, []).append(tid)
            elif b == BIN_NONE and self.vocab[tid] != UNK:
                none_ids.append(tid)
        object.__setattr__(
            self, "_bins", {b: tuple(ids) for b, ids in bins.items()}
        )
        object.__setattr__(self, "_none_ids", tuple(none_ids))

    @property
    def num_bins(self) -> int:
        return 2 ** self.l

    def bin_members(self, index: int) -> tuple[int, ...]:
        return self._bins.get(index, ())

    def none_tokens(self) -> tuple[int, ...]:
        """NONE-marked tokens selectable at carrying positions (excludes <unk>)."""
        return self._none_ids

    def candidates_for(self, bits: str) -> tuple[int, ...]:
        """Token ids mapped to ``bits``, ascending id order."""
        return self.bin_members(int(bits, 2))

    def validate(self) -> None:
        if len(self.assignment) != len(self.vocab):
            raise InvariantViolation("assignment not total over vocabulary")
        if self.scheme not in SCHEMES:
            raise InvariantViolation(f"unknown scheme {self.scheme!r}")
        eos_ids = [i for i, t in enumerate(self.vocab) if t == EOS]
        if len(eos_ids) != 1:
            raise InvariantViolation("vocabulary must contain exactly one <eos>")
        for tid, b in enumerate(self.assignment):
            tok = self.vocab[tid]
            if tok == EOS:
                if b != BIN_EOS:
                    raise InvariantViolation("<eos> not in the eos bin")
            elif b == BIN_EOS:
                raise InvariantViolation(f"non-eos token {tok!r} in the eos bin")
            elif b >= self.num_bins:
                raise InvariantViolation(f"bin index {b} out of range")
            elif b < BIN_EOS:
                raise InvariantViolation(f"bad assignment value {b}")
        for b in range(self.num_bins):
            if not self.bin_members(b):
                raise InvariantViolation(f"bin {b} is empty")


def bits_of(f: BinAssignment, token_id: int) -> str:
    """The l-bit big-endian stream carried by this token ('' for eos/NONE)."""
    b = f.assignment[token_id]
    if b < 0:
        return ""
    return format(b, f"0{f.l}b")


def _assignable_ids(model: BpeModel) -> list[int]:
    reserved = {model.eos_id, model.unk_id}
    return [i for i in range(model.size) if i not in reserved]


def _base_assignment(model: BpeModel) -> list[int]:
    assignment = [BIN_NONE] * model.size
    assignment[model.eos_id] = BIN_EOS
    return assignment


def build_sabins(
    model: BpeModel,
    freqs: FrequencyTable,
    syndb: SynonymDB,
    l: int,
    key: SecretKey,
    log: list | None = None,
) -> BinAssignment:
    """Frequency-priority keyed assignment spreading synonyms across bins.

    Tokens are visited in non-increasing corpus frequency (ascending-id
    tiebreak). For each visited token, the unprocessed members of its
    substitution set are placed in chunks of n_s = min(|chunk|, 2**l) into
    n_s distinct bins, with tokens, bins and the bijection all drawn from
    the keyed stream in that documented order.

    ``log`` (optional) collects (anchor_id, chunk_token_ids, chunk_bins)
    tuples so tests can assert chunk bijectivity and visit order.
    """
    if EOS not in model.vocab:
        raise MissingEos("vocabulary lacks <eos>")
    num_bins = 2 ** l
    assignable = _assignable_ids(model)
    if num_bins > len(assignable):
        raise BinUnderfilled(
            f"2**{l} bins cannot be filled from {len(assignable)} assignable tokens"
        )
    stream = key.stream("sabins")
    assignment = _base_assignment(model)
    processed = {model.eos_id, model.unk_id}
    bin_range = list(range(num_bins))

    for anchor in freqs.sorted_ids():
        if anchor in (model.eos_id, model.unk_id):
            continue
        members = substitution_set(syndb, model, anchor).members
        pending = sorted(m for m in members if m not in processed)
        while pending:
            n_s = min(len(pending), num_bins)
            chunk = stream.sample(pending, n_s)
            chunk_bins = stream.sample(bin_range, n_s)
            perm = list(range(n_s))
            stream.shuffle(perm)
            placed = []
            for i, tid in enumerate(chunk):
                b = chunk_bins[perm[i]]
                assignment[tid] = b
                placed.append(b)
                processed.add(tid)
            if log is not None:
                log.append((anchor, tuple(chunk), tuple(placed)))
            pending = [t for t in pending if t not in processed]

    f = BinAssignment(
        l=l,
        assignment=tuple(assignment),
        vocab=tuple(model.vocab),
        scheme="sabins",
        key_fingerprint=key.fingerprint,
    )
    f.validate()
    return f


def _even_partition(
    model: BpeModel, pool: list[int], l: int, key: SecretKey
) -> list[int]:
    num_bins = 2 ** l
    if num_bins > len(pool):
        raise BinUnderfilled(
            f"2**{l} bins cannot be filled from {len(pool)} remaining tokens"
        )
    stream = key.stream("partition")
    shuffled = list(pool)
    stream.shuffle(shuffled)
    assignment = _base_assignment(model)
    for j, tid in enumerate(shuffled):
        assignment[tid] = j % num_bins
    return assignment


def build_bins_random(model: BpeModel, l: int, key: SecretKey) -> BinAssignment:
    """Keyed random even partition; bin sizes differ by at most one."""
    if EOS not in model.vocab:
        raise MissingEos("vocabulary lacks <eos>")
    assignment = _even_partition(model, _assignable_ids(model), l, key)
    f = BinAssignment(
        l=l,
        assignment=tuple(assignment),
        vocab=tuple(model.vocab),
        scheme="bins",
        key_fingerprint=key.fingerprint,
    )
    f.validate()
    return f


def build_bins_common(
    model: BpeModel,
    freqs: FrequencyTable,
    l: int,
    key: SecretKey,
    common_count: int,
) -> BinAssignment:
    """Random even partition with the top-frequency tokens marked NONE."""
    if EOS not in model.vocab:
        raise MissingEos("vocabulary lacks <eos>")
    assignable = _assignable_ids(model)
    if common_count >= len(assignable):
        raise BinUnderfilled("common_count leaves no tokens to partition")
    by_freq = sorted(assignable, key=lambda i: (-freqs.counts[i], i))
    common = set(by_freq[:common_count])
    pool = [i for i in assignable if i not in common]
    assignment = _even_partition(model, pool, l, key)
    f = BinAssignment(
        l=l,
        assignment=tuple(assignment),
        vocab=tuple(model.vocab),
        scheme="bins-common",
        key_fingerprint=key.fingerprint,
    )
    f.validate()
    return f


# --- file format ---

_SPECIAL = {BIN_NONE: "NONE", BIN_EOS: "EOS"}
_SPECIAL_INV = {v: k for k, v in _SPECIAL.items()}


def serialize(f: BinAssignment, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"bins-v1 scheme={f.scheme} l={f.l} key={f.key_fingerprint}\n"
        )
        for tid, tok in enumerate(f.vocab):
            value = _SPECIAL.get(f.assignment[tid], str(f.assignment[tid]))
            fh.write(f"{tok}\t{value}\n")


def deserialize(path, vocab: list[str] | tuple[str, ...]) -> BinAssignment:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("bins-v1 "):
        raise ParseError("not a bins-v1 file", line=1)
    fields = dict(
        part.split("=", 1) for part in lines[0].split()[1:] if "=" in part
    )
    try:
        l = int(fields["l"])
        scheme = fields["scheme"]
        fingerprint = fields["key"]
    except (KeyError, ValueError):
        raise ParseError("bad bins-v1 header", line=1)
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected '<token>\\t<bin>'", line=lineno)
        tok, value = parts
        if tok in seen:
            raise ParseError(f"duplicate token {tok!r}", line=lineno)
        if value in _SPECIAL_INV:
            seen[tok] = _SPECIAL_INV[value]
        else:
            try:
                seen[tok] = int(value)
            except ValueError:
                raise ParseError(f"bad bin value {value!r}", line=lineno)
    missing = [t for t in vocab if t not in seen]
    if missing or len(seen) != len(vocab):
        raise InvariantViolation("token set does not match vocabulary")
    assignment = tuple(seen[t] for t in vocab)
    f = BinAssignment(
        l=l,
        assignment=assignment,
        vocab=tuple(vocab),
        scheme=scheme,
        key_fingerprint=fingerprint,
    )
    f.validate()
    return f
