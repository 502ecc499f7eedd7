import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import pytest

from stegobridge import BridgeCore, serve_tcp

TOY_VOCAB = ["<eos>", "<unk>"] + [f"g{i:02d}" for i in range(30)]


@pytest.fixture(scope="session")
def vocab():
    return list(TOY_VOCAB)


@pytest.fixture(scope="session")
def core(vocab):
    return BridgeCore(vocab)


@pytest.fixture()
def server(core):
    srv, port = serve_tcp(core)
    yield port
    srv.shutdown()
    srv.server_close()
