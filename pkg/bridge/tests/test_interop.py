"""Full-stack interop: a codec-side client embedding through the live bridge.

These tests need the codec package installed; they are skipped otherwise
so the bridge suite stays self-contained. All communication still goes
over the TCP wire protocol — nothing here reaches into server internals.
"""

import pytest

stegopivot = pytest.importorskip("stegopivot")

from stegopivot import SecretKey, build_bins_random, codec, train_bpe
from stegopivot.lm import RemoteProvider

from stegobridge import BridgeCore, serve_tcp

CORPUS = ["alpha beta gamma delta", "epsilon zeta eta theta",
          "iota kappa lamda mu", "nu xi omicron pi"]


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    d = tmp_path_factory.mktemp("interop")
    model = train_bpe(CORPUS, 0, word_level=True)
    from stegopivot.tokenizer import save_model

    save_model(model, d / "model.bpe")
    core = BridgeCore.from_model_file(d / "model.bpe")
    srv, port = serve_tcp(core)
    yield model, port
    srv.shutdown()
    srv.server_close()


def test_remote_provider_accepts_matching_vocab(world):
    model, port = world
    provider = RemoteProvider(f"127.0.0.1:{port}", model.vocab)
    assert provider.size == model.size
    provider.close()


def test_embed_extract_round_trip_through_bridge(world):
    model, port = world
    f = build_bins_random(model, 2, SecretKey.from_passphrase("interop"))
    params = codec.StegoParams(s=1, l=2, framing="header32", max_tokens=200)
    provider = RemoteProvider(f"127.0.0.1:{port}", model.vocab)
    try:
        st = codec.embed(CORPUS[0], b"\xc3\x51", params, f, provider, model)
    finally:
        provider.close()
    bits = codec.extract(st.surface, params, f, model)
    assert codec.bits_to_bytes(bits) == b"\xc3\x51"


def test_sparse_client_round_trips_with_fallback(world):
    model, port = world
    f = build_bins_random(model, 3, SecretKey.from_passphrase("interop-sparse"))
    params = codec.StegoParams(s=1, l=3, framing="raw", max_tokens=200)
    # k=2 over 8 bins: most steps miss the wanted bin and fall back to dense
    provider = RemoteProvider(f"127.0.0.1:{port}", model.vocab, sparse_k=2)
    payload = "101100111010"
    try:
        st = codec.generate_stream(
            CORPUS[1], codec.BitStream(payload), params, f, provider, model
        )
    finally:
        provider.close()
    assert codec.extract(st.surface, params, f, model,
                         declared_bit_length=len(payload)) == payload
