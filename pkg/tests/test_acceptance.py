"""Acceptance gates for the whole coding channel.

Each test exercises one release criterion end to end on the shared toy
world and prints a single pass/fail line with the measured numbers.
"""

import math
import random
import time

import pytest
from scipy.stats import binomtest

from stegopivot import (
    SecretKey,
    bits_of,
    build_bins_common,
    build_bins_random,
    build_sabins,
    cli,
    codec,
    count_frequencies,
    metrics,
    synonyms,
    train_bpe,
)
from stegopivot.bins import BIN_EOS
from stegopivot.lm import NgramProvider

from toydata import make_corpus, make_synsets
from test_metrics import oracle_bleu


def check(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" -- {detail}" if detail else ""
    print(f"[{status}] {criterion}{suffix}")
    assert ok, f"{criterion}{suffix}"


def random_bits(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("01") for _ in range(n))


def build(scheme, toy, l, key, common_count=4):
    if scheme == "sabins":
        return build_sabins(toy["model"], toy["freqs"], toy["syndb"], l, key)
    if scheme == "bins":
        return build_bins_random(toy["model"], l, key)
    return build_bins_common(toy["model"], toy["freqs"], l, key, common_count)


class TestLosslessChannel:
    def test_thousand_randomized_round_trips(self, toy):
        rng = random.Random(123)
        model, provider = toy["model"], toy["embed_provider"]
        schemes = ("sabins", "bins", "bins-common")
        framings = ("header32", "raw")
        t0 = time.monotonic()
        failures = 0
        for i in range(1000):
            s, l = rng.choice((1, 2, 3)), rng.choice((1, 2, 3))
            scheme, framing = schemes[i % 3], framings[i % 2]
            key = SecretKey.from_passphrase(f"trial{i}")
            f = build(scheme, toy, l, key)
            payload = random_bits(rng, rng.randrange(1, 257))
            framed = codec.frame_payload(payload, framing, l)
            frames = len(framed) // l
            params = codec.StegoParams(
                s=s, l=l, framing=framing, max_tokens=1 + (frames - 1) * s + 600
            )
            cover = rng.choice(toy["corpus"])
            st = codec.generate_stream(
                cover, codec.BitStream(framed), params, f, provider, model
            )
            declared = None if framing == "header32" else len(payload)
            if codec.extract(st.surface, params, f, model, declared) != payload:
                failures += 1
        elapsed = time.monotonic() - t0
        check(
            "lossless channel",
            failures == 0 and elapsed < 120.0,
            f"{1000 - failures}/1000 round trips, {elapsed:.1f}s",
        )


class TestPartitionInvariants:
    def test_hundred_random_builds(self, toy):
        rng = random.Random(202)
        model = toy["model"]
        schemes = ("sabins", "bins", "bins-common")
        bad = 0
        for i in range(100):
            l = rng.choice((1, 2, 3))
            key = SecretKey.from_passphrase(f"partition{i}")
            f = build(schemes[i % 3], toy, l, key)
            ok = (
                len(f.assignment) == model.size  # total
                and f.assignment[model.eos_id] == BIN_EOS
                and sum(1 for b in f.assignment if b == BIN_EOS) == 1
                and all(BIN_EOS <= b < 2 ** l for b in f.assignment)
                and all(f.bin_members(b) for b in range(2 ** l))
            )
            # disjointness: one bin per token is structural, but confirm the
            # member lists do not overlap either
            seen = set()
            for b in range(2 ** l):
                members = set(f.bin_members(b))
                ok = ok and not (members & seen)
                seen |= members
            bad += not ok
        check("partition invariants", bad == 0, f"{100 - bad}/100 builds clean")

    def test_synonym_spread(self):
        l = 2
        words = [f"w{i:03d}" for i in range(400)]
        model = train_bpe([" ".join(words)], 0, word_level=True)
        freqs = count_frequencies(
            model, [" ".join([w] * (400 - i)) for i, w in enumerate(words)]
        )
        rng = random.Random(303)
        pool = list(words)
        rng.shuffle(pool)
        synsets, at = [], 0
        while len(synsets) < 100:
            size = rng.randrange(2, 2 ** l + 1)
            synsets.append(frozenset(pool[at:at + size]))
            at += size
        db = synonyms.SynonymDB(synsets)
        bad = 0
        for k in range(50):
            f = build_sabins(model, freqs, db, l, SecretKey.from_passphrase(f"spread{k}"))
            for syn in synsets:
                bins_used = [f.assignment[model.vocab.index(w)] for w in syn]
                if len(set(bins_used)) != len(bins_used) or min(bins_used) < 0:
                    bad += 1
        check(
            "synonym spread",
            bad == 0,
            f"{50 * 100 - bad}/{50 * 100} synset placements pairwise distinct",
        )


class TestBitAnchor:
    def test_bin_three_reads_0011_at_l4(self, toy):
        f = build_bins_random(toy["model"], 4, SecretKey.from_passphrase("anchor"))
        token = f.bin_members(3)[0]
        got = bits_of(f, token)
        check("bit-string anchor", got == "0011", f"bin 3 at l=4 reads {got!r}")


class TestBpwLaw:
    def test_exact_bit_identity_and_rate(self, toy):
        model, provider = toy["model"], toy["embed_provider"]
        rng = random.Random(404)
        key = SecretKey.from_passphrase("bpwkey")
        bins_by_l = {
            l: build_sabins(model, toy["freqs"], toy["syndb"], l, key)
            for l in (1, 2, 3)
        }
        per_cell = 60  # 9 cells x 60 = 540 texts
        identity_violations = 0
        rate_ok = True
        rates = []
        for s in (1, 2, 3):
            for l in (1, 2, 3):
                samples = []
                for t in range(per_cell):
                    nbits = rng.randrange(240, 481)
                    framed = codec.frame_payload(random_bits(rng, nbits), "raw", l)
                    frames = len(framed) // l
                    params = codec.StegoParams(
                        s=s, l=l, framing="raw",
                        max_tokens=1 + (frames - 1) * s,
                    )
                    cover = rng.choice(toy["corpus"])
                    st = codec.generate_stream(
                        cover, codec.BitStream(framed), params, bins_by_l[l],
                        provider, model,
                    )
                    if st.embedded_bit_count != l * math.ceil(nbits / l):
                        identity_violations += 1
                    samples.append(
                        st.embedded_bit_count / len(st.surface.split())
                    )
                mean = sum(samples) / len(samples)
                rates.append(f"s={s} l={l}: {mean:.3f}")
                if not 0.85 * l / s <= mean <= 1.15 * l / s:
                    rate_ok = False
        check(
            "bit-rate law",
            identity_violations == 0 and rate_ok,
            f"{identity_violations} identity violations; mean rates {'; '.join(rates)}",
        )


class TestMetricOracles:
    def test_uniform_perplexity_is_vocab_size(self, toy):
        model = toy["model"]
        uniform = NgramProvider(size=model.size, order=3, k=1.0, tables={})
        text = toy["corpus"][0]
        ppl = metrics.perplexity(text, uniform, model)
        rel = abs(ppl - model.size) / model.size
        check(
            "uniform-provider perplexity",
            rel < 1e-9,
            f"ppl={ppl:.12g} for m={model.size}, rel err {rel:.2e}",
        )

    def test_bleu_against_brute_force(self, toy):
        model, corpus = toy["model"], toy["corpus"]
        rng = random.Random(505)
        from stegopivot.tokenizer import encode

        mismatches = 0
        for _ in range(50):
            a, b = rng.choice(corpus), rng.choice(corpus)
            if metrics.bleu(a, b, model) != oracle_bleu(encode(model, a),
                                                        encode(model, b)):
                mismatches += 1
        identity = metrics.bleu(corpus[0], corpus[0], model)
        check(
            "BLEU oracle",
            mismatches == 0 and identity == 1.0,
            f"{50 - mismatches}/50 pairs match brute force; self-BLEU={identity}",
        )


class TestPerplexityTrends:
    T = 180
    N = 500

    def _cell_ppls(self, toy, s, l, bins_by_l):
        model = toy["model"]
        rng = random.Random(999)
        frames = (self.T - 1) // s + 1
        nb = l * frames
        params = codec.StegoParams(s=s, l=l, framing="raw", max_tokens=self.T)
        ppls = []
        for i in range(self.N):
            st = codec.generate_stream(
                toy["corpus"][i], codec.BitStream(random_bits(rng, nb)),
                params, bins_by_l[l], toy["embed_provider"], model,
            )
            ppls.append(metrics.perplexity(st.surface, toy["provider"], model))
        return ppls

    def test_perplexity_monotone_in_l_and_s(self, toy):
        key = SecretKey.from_passphrase("trendkey")
        bins_by_l = {
            l: build_sabins(toy["model"], toy["freqs"], toy["syndb"], l, key)
            for l in (1, 2, 3)
        }
        cells = {}
        for s, l in ((3, 1), (3, 2), (3, 3), (1, 1), (2, 1)):
            cells[s, l] = self._cell_ppls(toy, s, l, bins_by_l)

        def sign_p(lower, higher):
            wins = sum(h > lo for lo, h in zip(lower, higher))
            return binomtest(wins, self.N, alternative="greater").pvalue

        mean = lambda xs: sum(xs) / len(xs)
        p_l12 = sign_p(cells[3, 1], cells[3, 2])
        p_l23 = sign_p(cells[3, 2], cells[3, 3])
        p_s12 = sign_p(cells[2, 1], cells[1, 1])  # ppl falls as s grows
        p_s23 = sign_p(cells[3, 1], cells[2, 1])
        means_l = [mean(cells[3, l]) for l in (1, 2, 3)]
        means_s = [mean(cells[s, 1]) for s in (1, 2, 3)]
        ok = (
            means_l[0] < means_l[1] < means_l[2]
            and means_s[0] > means_s[1] > means_s[2]
            and max(p_l12, p_l23, p_s12, p_s23) < 0.01
        )
        check(
            "perplexity trends",
            ok,
            f"l-sweep means {['%.2f' % m for m in means_l]} "
            f"(p={p_l12:.2g}, {p_l23:.2g}); "
            f"s-sweep means {['%.2f' % m for m in means_s]} "
            f"(p={p_s12:.2g}, {p_s23:.2g})",
        )


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, tmp_path):
        d = tmp_path
        words, corpus = make_corpus(800, seed=11)
        (d / "corpus.txt").write_text("\n".join(corpus) + "\n", encoding="utf-8")
        synonyms.save_synsets(make_synsets(words, seed=7), d / "synsets.txt")
        (d / "covers.txt").write_text("\n".join(corpus[:6]) + "\n",
                                      encoding="utf-8")
        (d / "payload.bin").write_bytes(b"same key, same bytes")
        assert cli.main([
            "bpe-train", "--corpus", str(d / "corpus.txt"), "--merges", "0",
            "--word-level", "--out", str(d / "model.bpe"),
        ]) == 0
        for run in ("a", "b"):
            assert cli.main([
                "bins-build", "--bpe", str(d / "model.bpe"),
                "--corpus", str(d / "corpus.txt"),
                "--synsets", str(d / "synsets.txt"),
                "--scheme", "sabins", "--bits", "2", "--key", "determinism",
                "--out", str(d / f"bins_{run}.json"),
            ]) == 0
            assert cli.main([
                "embed", "--bpe", str(d / "model.bpe"),
                "--bins", str(d / f"bins_{run}.json"),
                "--in", str(d / "covers.txt"),
                "--payload", str(d / "payload.bin"),
                "--provider", f"ngram:{d / 'corpus.txt'}", "--step", "2",
                "--max-tokens", "300", "--out", str(d / f"stego_{run}.txt"),
            ]) == 0
        same_bins = (d / "bins_a.json").read_bytes() == (d / "bins_b.json").read_bytes()
        same_stego = (d / "stego_a.txt").read_bytes() == (d / "stego_b.txt").read_bytes()
        same_manifest = ((d / "stego_a.txt.manifest").read_bytes()
                         == (d / "stego_b.txt.manifest").read_bytes())
        check(
            "determinism",
            same_bins and same_stego and same_manifest,
            f"bins={same_bins} stego={same_stego} manifest={same_manifest}",
        )
