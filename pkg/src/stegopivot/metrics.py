"""Evaluation metrics: bits-per-word, BLEU, and perplexity.

BLEU here is sentence-level with clipped n-gram precisions and a brevity
penalty. The order cap is lowered to the candidate length so an identical
pair always scores 1.0, and zero higher-order precisions get add-epsilon
smoothing (a zero unigram precision short-circuits to 0.0).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyCover, EmptyInput, ZeroProbabilityToken
from .lm import GenerationContext
from .tokenizer import BpeModel, encode

BLEU_EPSILON = 1e-9


@dataclass(frozen=True)
class EvalReport:
    """Per-text evaluation row."""

    bpw: float
    bleu: float
    ppl: float
    cover_tokens: int
    stego_tokens: int
    embedded_bits: int


def bpw(embedded_bits: int, cover: str, model: BpeModel) -> float:
    """Embedded bits over the cover token count (excluding <eos>)."""
    n = len(encode(model, cover))
    if n == 0:
        raise EmptyCover("cover text has no tokens")
    return embedded_bits / n


def _ngrams(tokens: list, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, model: BpeModel, max_n: int = 4) -> float:
    cand = encode(model, candidate)
    ref = encode(model, reference)
    if not cand or not ref:
        raise EmptyInput("candidate and reference must be non-empty")
    max_n = min(max_n, len(cand))
    precisions = []
    for n in range(1, max_n + 1):
        cand_grams = _ngrams(cand, n)
        ref_grams = _ngrams(ref, n)
        clipped = sum(min(c, ref_grams[g]) for g, c in cand_grams.items())
        total = sum(cand_grams.values())
        precisions.append(clipped / total)
    if precisions[0] == 0.0:
        return 0.0
    precisions = [p if p > 0.0 else BLEU_EPSILON for p in precisions]
    brevity = 1.0 if len(cand) > len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return brevity * math.exp(sum(math.log(p) for p in precisions) / len(precisions))


def perplexity(text: str, provider, model: BpeModel) -> float:
    """exp of the mean negative log-likelihood, <eos> included as final event."""
    ids = encode(model, text) + [model.eos_id]
    nll = 0.0
    for i, tid in enumerate(ids):
        dist = provider.next_distribution(GenerationContext(prefix=tuple(ids[:i])))
        p = float(dist.probs[tid])
        if p <= 0.0:
            raise ZeroProbabilityToken(f"token id {tid} has zero probability")
        nll -= math.log(p)
    return math.exp(nll / len(ids))


REPORT_COLUMNS = (
    "index", "bpw", "bleu", "ppl", "cover_tokens", "stego_tokens", "bits"
)


def write_report(rows: Iterable[EvalReport], path) -> None:
    """One TSV row per text plus a trailing mean aggregate line."""
    rows = list(rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(REPORT_COLUMNS) + "\n")
        for i, r in enumerate(rows):
            fh.write(
                f"{i}\t{r.bpw:.6f}\t{r.bleu:.6f}\t{r.ppl:.6f}"
                f"\t{r.cover_tokens}\t{r.stego_tokens}\t{r.embedded_bits}\n"
            )
        if rows:
            n = len(rows)
            fh.write(
                "mean"
                f"\t{sum(r.bpw for r in rows) / n:.6f}"
                f"\t{sum(r.bleu for r in rows) / n:.6f}"
                f"\t{sum(r.ppl for r in rows) / n:.6f}"
                f"\t{sum(r.cover_tokens for r in rows) / n:.6f}"
                f"\t{sum(r.stego_tokens for r in rows) / n:.6f}"
                f"\t{sum(r.embedded_bits for r in rows) / n:.6f}\n"
            )
