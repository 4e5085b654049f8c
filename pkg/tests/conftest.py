from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from stylorisk.config import PipelineConfig
from stylorisk.provider import StubProvider
from stylorisk.store import ProfileStore
from stylorisk.synthetic import make_separable_corpus


@pytest.fixture(scope="session")
def stub_provider():
    return StubProvider()


@pytest.fixture(scope="session")
def small_corpus():
    """Six separable authors, six training samples and four held-out each."""
    return make_separable_corpus(n_authors=6, samples_per_author=6, held_out=4, seed=42)


@pytest.fixture(scope="session")
def small_store(tmp_path_factory, stub_provider, small_corpus):
    train, _ = small_corpus
    store = ProfileStore(tmp_path_factory.mktemp("store"), stub_provider)
    store.warm_up(train)
    return store


@pytest.fixture
def base_config():
    return PipelineConfig(candidates_n=6)


class _FakeEndpoint(BaseHTTPRequestHandler):
    """Minimal OpenAI-compatible endpoint with scriptable failures."""

    def log_message(self, *args):
        pass

    def do_POST(self):
        state = self.server.state
        state["requests"].append(self.path)
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        state["payloads"].append((self.path, payload))

        if state.get("auth_fail"):
            self._reply(401, {"error": "bad key"})
            return
        if state.get("fail_429", 0) > 0:
            state["fail_429"] -= 1
            self._reply(429, {"error": "rate limited"})
            return
        if state.get("fail_500", 0) > 0:
            state["fail_500"] -= 1
            self._reply(500, {"error": "boom"})
            return

        if self.path == "/v1/chat/completions":
            if state.get("malformed_chat"):
                self._reply(200, {"nope": True})
                return
            replies = state.get("chat_replies")
            content = replies.pop(0) if replies else state.get("chat_reply", "ok")
            self._reply(200, {"choices": [{"message": {"role": "assistant", "content": content}}]})
        elif self.path == "/v1/embeddings":
            dim = state.get("embed_dim", 4)
            self._reply(200, {"data": [{"embedding": [0.5] * dim}]})
        elif self.path == "/v1/search":
            self._reply(200, {"hits": state.get("hits", [])})
        else:
            self._reply(404, {"error": "unknown path"})

    def _reply(self, status, body):
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


@pytest.fixture
def fake_endpoint():
    server = HTTPServer(("127.0.0.1", 0), _FakeEndpoint)
    server.state = {"requests": [], "payloads": []}
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        thread.join(timeout=5)


@pytest.fixture
def endpoint_url(fake_endpoint):
    host, port = fake_endpoint.server_address
    return f"http://{host}:{port}"
