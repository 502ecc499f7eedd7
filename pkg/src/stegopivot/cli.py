"""Batch command-line interface.

Subcommands: bpe-train, bins-build, embed, extract, eval, bridge-check.
Exit codes: 0 success, 1 runtime failure, 2 usage error. All randomness
flows from --key; two identical invocations produce identical artifacts.
Log level comes from the STEGOPIVOT_LOG environment variable.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bins as binsmod
from . import codec, metrics, tokenizer
from .errors import StegoPivotError
from .keys import SecretKey
from .lm import GenerationContext, NgramProvider, RemoteProvider, train_ngram

log = logging.getLogger("stegopivot")


def _read_lines(path: Path) -> list[str]:
    return [ln for ln in path.read_text(encoding="utf-8").split("\n") if ln.strip()]


def _require_file(parser: argparse.ArgumentParser, path: str | None, flag: str) -> Path:
    if path is None:
        parser.error(f"{flag} is required")
    p = Path(path)
    if not p.is_file():
        parser.error(f"{flag}: no such file: {p}")
    return p


def _make_provider(parser, spec: str, model, corpus_exclusions=()):
    kind, _, arg = spec.partition(":")
    if kind == "ngram":
        path = _require_file(parser, arg or None, "--provider ngram:<path>")
        provider = train_ngram(model, _read_lines(path))
        if corpus_exclusions:
            provider = provider.with_exclusions(corpus_exclusions)
        return provider
    if kind == "remote":
        return RemoteProvider(arg, model.vocab)
    parser.error(f"--provider must be ngram:<path> or remote:<addr>, got {spec!r}")


def cmd_bpe_train(parser, args) -> int:
    corpus = _read_lines(_require_file(parser, args.corpus, "--corpus"))
    model = tokenizer.train_bpe(corpus, args.merges, word_level=args.word_level)
    tokenizer.save_model(model, args.out)
    log.info("wrote %s (%d merges, %d tokens)", args.out, len(model.merges),
             model.size)
    return 0


def cmd_bins_build(parser, args) -> int:
    model = tokenizer.load_model(_require_file(parser, args.bpe, "--bpe"))
    key = SecretKey.from_passphrase(args.key)
    if args.scheme == "sabins":
        corpus = _read_lines(_require_file(parser, args.corpus, "--corpus"))
        freqs = tokenizer.count_frequencies(model, corpus)
        syndb_path = _require_file(parser, args.synsets, "--synsets")
        from .synonyms import load_synsets

        f = binsmod.build_sabins(model, freqs, load_synsets(syndb_path),
                                 args.bits, key)
    elif args.scheme == "bins":
        f = binsmod.build_bins_random(model, args.bits, key)
    else:
        corpus = _read_lines(_require_file(parser, args.corpus, "--corpus"))
        freqs = tokenizer.count_frequencies(model, corpus)
        f = binsmod.build_bins_common(model, freqs, args.bits, key,
                                      args.common_count)
    binsmod.serialize(f, args.out)
    log.info("wrote %s (scheme=%s l=%d)", args.out, f.scheme, f.l)
    return 0


def cmd_embed(parser, args) -> int:
    model = tokenizer.load_model(_require_file(parser, args.bpe, "--bpe"))
    covers = _read_lines(_require_file(parser, args.in_path, "--in"))
    payload = _require_file(parser, args.payload, "--payload").read_bytes()
    provider = _make_provider(
        parser, args.provider, model,
        corpus_exclusions=(model.unk_id,) if model.unk_id is not None else (),
    )

    if payload:
        f = binsmod.deserialize(_require_file(parser, args.bins, "--bins"),
                                model.vocab)
        if args.bits is not None and args.bits != f.l:
            parser.error(f"--bits {args.bits} does not match bins file l={f.l}")
        params = codec.StegoParams(s=args.step, l=f.l, framing=args.framing,
                                   max_tokens=args.max_tokens)
        stream = codec.BitStream(
            codec.frame_payload(codec.bytes_to_bits(payload), args.framing, f.l)
        )
    else:
        f = None
        params = codec.StegoParams(s=None, l=0, max_tokens=args.max_tokens)
        stream = codec.BitStream("")

    out_lines = []
    manifest = ["line\tbit_offset\tbits\tstego_tokens"]
    for i, cover in enumerate(covers):
        offset = stream.cursor
        st = codec.generate_stream(cover, stream, params, f, provider, model,
                                   allow_partial=True)
        out_lines.append(st.surface)
        manifest.append(
            f"{i}\t{offset}\t{st.embedded_bit_count}\t{len(st.tokens)}"
        )
    if stream.remaining:
        raise codec.PayloadTooLarge(
            f"{stream.remaining} framed bits left after {len(covers)} texts"
        )
    Path(args.out).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    Path(args.out + ".manifest").write_text("\n".join(manifest) + "\n",
                                            encoding="utf-8")
    return 0


def cmd_extract(parser, args) -> int:
    model = tokenizer.load_model(_require_file(parser, args.bpe, "--bpe"))
    f = binsmod.deserialize(_require_file(parser, args.bins, "--bins"), model.vocab)
    stego_lines = _read_lines(_require_file(parser, args.in_path, "--in"))
    params = codec.StegoParams(s=args.step, l=f.l, framing=args.framing)

    def frames():
        for line in stego_lines:
            yield from codec.iter_carried_frames(
                tokenizer.encode(model, line), params, f
            )

    collected = ""
    gen = frames()
    if args.framing == "header32":
        for bits in gen:
            collected += bits
            if len(collected) >= codec.HEADER_BITS:
                break
        if len(collected) < codec.HEADER_BITS:
            raise codec.BadHeader("texts end inside the length header")
        declared = int(collected[:codec.HEADER_BITS], 2)
        needed = codec.HEADER_BITS + declared
        start = codec.HEADER_BITS
    else:
        if args.declared_bits is None:
            parser.error("--declared-bits is required with --framing raw")
        declared, needed, start = args.declared_bits, args.declared_bits, 0
    for bits in gen:
        if len(collected) >= needed:
            break
        collected += bits
    if len(collected) < needed:
        raise codec.TruncatedPayload(
            f"needed {needed} bits, recovered {len(collected)}"
        )
    payload_bits = collected[start:needed]
    if len(payload_bits) % 8 == 0:
        Path(args.out).write_bytes(codec.bits_to_bytes(payload_bits))
    else:
        Path(args.out).write_text(payload_bits, encoding="utf-8")
    return 0


def cmd_eval(parser, args) -> int:
    model = tokenizer.load_model(_require_file(parser, args.bpe, "--bpe"))
    covers = _read_lines(_require_file(parser, args.in_path, "--in"))
    stegos = _read_lines(_require_file(parser, args.stego, "--stego"))
    if len(covers) != len(stegos):
        parser.error("--in and --stego must have the same number of lines")
    manifest_path = Path(args.manifest or args.stego + ".manifest")
    bits_per_line = [0] * len(stegos)
    if manifest_path.is_file():
        for row in _read_lines(manifest_path)[1:]:
            idx, _, nbits, _ = row.split("\t")
            bits_per_line[int(idx)] = int(nbits)
    provider = _make_provider(parser, args.provider, model)
    rows = []
    for cover, stego, nbits in zip(covers, stegos, bits_per_line):
        rows.append(metrics.EvalReport(
            bpw=metrics.bpw(nbits, cover, model),
            bleu=metrics.bleu(stego, cover, model),
            ppl=metrics.perplexity(stego, provider, model),
            cover_tokens=len(tokenizer.encode(model, cover)),
            stego_tokens=len(tokenizer.encode(model, stego)),
            embedded_bits=nbits,
        ))
    metrics.write_report(rows, args.out)
    return 0


def cmd_bridge_check(parser, args) -> int:
    model = tokenizer.load_model(_require_file(parser, args.bpe, "--bpe"))
    kind, _, addr = args.provider.partition(":")
    if kind != "remote":
        parser.error("bridge-check needs --provider remote:<addr>")
    provider = RemoteProvider(addr, model.vocab)
    try:
        print(f"vocab size {provider.size}")
        provider._session("bridge-check")
        dist = provider.next_distribution(
            GenerationContext(source="bridge-check", prefix=())
        )
        total = float(dist.probs.sum())
        if abs(total - 1.0) > 1e-6:
            print(f"probability sum check failed: {total}", file=sys.stderr)
            return 1
        print("ok")
        return 0
    finally:
        provider.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stegopivot")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--bpe")
        p.add_argument("--bins")
        p.add_argument("--synsets")
        p.add_argument("--corpus")
        p.add_argument("--in", dest="in_path")
        p.add_argument("--out")
        p.add_argument("--payload")
        p.add_argument("--key", default="")
        p.add_argument("--step", type=int, default=1)
        p.add_argument("--bits", type=int, default=None)
        p.add_argument("--scheme", choices=binsmod.SCHEMES, default="sabins")
        p.add_argument("--framing", choices=("header32", "raw"),
                       default="header32")
        p.add_argument("--declared-bits", dest="declared_bits", type=int)
        p.add_argument("--max-tokens", dest="max_tokens", type=int, default=1024)
        p.add_argument("--provider", default="")
        p.add_argument("--word-level", dest="word_level", action="store_true")
        return p

    common(sub.add_parser("bpe-train")).add_argument(
        "--merges", type=int, default=8000
    )
    common(sub.add_parser("bins-build")).add_argument(
        "--common-count", dest="common_count", type=int, default=1000
    )
    common(sub.add_parser("embed"))
    common(sub.add_parser("extract"))
    common(sub.add_parser("eval")).add_argument("--stego")
    sub.choices["eval"].add_argument("--manifest")
    common(sub.add_parser("bridge-check"))
    return parser


_COMMANDS = {
    "bpe-train": cmd_bpe_train,
    "bins-build": cmd_bins_build,
    "embed": cmd_embed,
    "extract": cmd_extract,
    "eval": cmd_eval,
    "bridge-check": cmd_bridge_check,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("STEGOPIVOT_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None and args.command != "bridge-check":
        parser.error("--out is required")
    if args.command == "bins-build" and args.bits is None:
        parser.error("--bits is required")
    try:
        return _COMMANDS[args.command](parser, args)
    except StegoPivotError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
