import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from semchain import backends
from semchain.errors import EmptyPrompt, ProtocolError, ServerError


def test_fnv1a64_offset_basis():
    assert backends.fnv1a64(b"") == 14695981039346656037


def test_fnv1a64_single_zero_byte():
    # pinned with a straight-line xor/multiply oracle
    assert backends.fnv1a64(b"\x00") == 12638153115695167455


def test_fnv1a64_abc():
    assert backends.fnv1a64(b"abc") == 16654208175385433931


def test_mock_embed_single_token():
    emb = backends.mock_embed("a a")
    assert np.count_nonzero(emb.values) == 1
    assert np.linalg.norm(emb.values) == pytest.approx(1.0, abs=1e-9)
    assert not emb.degenerate


def test_mock_embed_empty_is_degenerate():
    emb = backends.mock_embed("")
    assert emb.degenerate
    assert np.count_nonzero(emb.values) == 0
    assert emb.dim == 256


def test_mock_embed_bag_of_words_order_invariant():
    a = backends.mock_embed("red fox")
    b = backends.mock_embed("fox red")
    assert np.array_equal(a.values, b.values)


def test_mock_embed_punctuation_and_case_folding():
    assert np.array_equal(backends.mock_embed("Red, fox!").values,
                          backends.mock_embed("red fox").values)


def test_mock_generate_layout():
    img = backends.mock_generate("x", 0)
    assert len(img) == 17
    assert img.startswith(b"MOCKIMG1")
    assert img[8:16] == b"\x00" * 8
    assert img[16:] == b"x"


def test_mock_generate_deterministic_and_seed_sensitive():
    assert backends.mock_generate("p", 5) == backends.mock_generate("p", 5)
    assert backends.mock_generate("p", 5) != backends.mock_generate("p", 6)


def test_mock_generate_rejects_empty_prompt():
    with pytest.raises(EmptyPrompt):
        backends.mock_generate("", 0)


def test_mock_caption_seed_zero_anchor():
    for prompt in ("x", "red fox jumps", "a yellow tiger in  grass"):
        assert backends.mock_caption(backends.mock_generate(prompt, 0)) == prompt


def test_mock_caption_seed7_pinned_subset():
    # pinned by enumerating keep-bits with the fnv1a64 oracle
    img = backends.mock_generate("red fox jumps", 7)
    assert backends.mock_caption(img) == "fox jumps"


def test_mock_caption_content_hash_for_foreign_bytes():
    assert backends.mock_caption(b"\xff\x00") == "image-0a99a607"


def test_mock_backends_zero_elapsed():
    b = backends.mock_backends()
    caption, elapsed = b.caption(backends.mock_generate("p", 0))
    assert caption == "p" and elapsed == 0.0


class _StubHandler(BaseHTTPRequestHandler):
    responses = {}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        self.rfile.read(length)
        status, body = self.responses.get(self.path, (404, '{"error": "not found"}'))
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body.encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}", _StubHandler
    server.shutdown()


def test_remote_embed_normalizes_client_side(stub_server):
    url, handler = stub_server
    handler.responses = {"/v1/embed": (200, json.dumps(
        {"vector": [3.0, 4.0] + [0.0] * 382, "elapsed_ms": 12}))}
    client = backends.RemoteClient(url)
    emb, elapsed = client.embed("hello")
    assert emb.dim == 384
    assert np.linalg.norm(emb.values) == pytest.approx(1.0, abs=1e-9)
    assert elapsed == 12.0


def test_remote_malformed_json_raises_protocol_error(stub_server):
    url, handler = stub_server
    handler.responses = {"/v1/caption": (200, "{not json")}
    with pytest.raises(ProtocolError):
        backends.RemoteClient(url).caption(b"img")


def test_remote_missing_field_raises_protocol_error(stub_server):
    url, handler = stub_server
    handler.responses = {"/v1/generate": (200, json.dumps({"elapsed_ms": 1}))}
    with pytest.raises(ProtocolError, match="image_b64"):
        backends.RemoteClient(url).generate("p", 0)


def test_remote_server_error(stub_server):
    url, handler = stub_server
    handler.responses = {"/v1/embed": (500, json.dumps({"error": "boom"}))}
    with pytest.raises(ServerError, match="boom"):
        backends.RemoteClient(url).embed("x")


def test_default_backends_env_switch(monkeypatch):
    monkeypatch.delenv("SEMCHAIN_BACKEND_URL", raising=False)
    b = backends.mock_backends()
    assert backends.default_backends().caption.__qualname__ == b.caption.__qualname__
    monkeypatch.setenv("SEMCHAIN_BACKEND_URL", "http://localhost:1")
    remote = backends.default_backends()
    assert remote.caption.__self__.base_url == "http://localhost:1"
