"""Provider abstraction: chat completion, text embedding, web search.

Two implementations share one interface: `HttpProvider` speaks an
OpenAI-compatible wire protocol, `StubProvider` is fully offline and
deterministic (hashed bag-of-words embeddings, fixture-backed search,
and prompt-aware chat responses generated by a scoring shim).
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass

import requests

from . import _kernels
from .errors import (
    AuthError,
    DimMismatchError,
    EmptyTextError,
    MalformedResponseError,
    NoFixtureError,
    ProviderError,
    RateLimitedError,
)

STUB_EMBED_DIM = 256


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if not self.messages:
            raise ValueError("chat request needs at least one message")
        if self.messages[-1].role != "user":
            raise ValueError("last chat message must have role 'user'")

    @classmethod
    def single(cls, prompt: str, system: str | None = None, **kwargs) -> "ChatRequest":
        messages = []
        if system:
            messages.append(ChatMessage("system", system))
        messages.append(ChatMessage("user", prompt))
        return cls(tuple(messages), **kwargs)


@dataclass(frozen=True)
class Embedding:
    vector: tuple[float, ...]

    def __post_init__(self):
        if not self.vector:
            raise ValueError("embedding must be non-empty")
        if not all(math.isfinite(v) for v in self.vector):
            raise ValueError("embedding contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.vector)


@dataclass(frozen=True)
class SearchHit:
    title: str
    snippet: str
    url: str
    author_hint: str | None = None


@dataclass(frozen=True)
class WebSearchResult:
    query: str
    hits: tuple[SearchHit, ...]


def cosine(a: Embedding, b: Embedding) -> float:
    if a.dim != b.dim:
        raise DimMismatchError(f"dim {a.dim} vs {b.dim}")
    dot = sum(x * y for x, y in zip(a.vector, b.vector))
    na = math.sqrt(sum(x * x for x in a.vector))
    nb = math.sqrt(sum(y * y for y in b.vector))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def normalize(values) -> Embedding:
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return Embedding(tuple(v / norm for v in values))


def stable_hash(text: str) -> int:
    """Platform-stable 64-bit hash of a string (FNV-1a over UTF-8)."""
    return _kernels.fnv1a64(text.encode("utf-8"))


class StubProvider:
    """Deterministic offline provider.

    Embeddings are 256-bucket hashed bag-of-words counts, L2-normalized.
    Web search serves hits from a fixture mapping of query keyword to hit
    list.  Chat replies are produced by a prompt-aware shim so the full
    prompt-build/response-parse paths stay exercised offline.
    """

    kind = "stub"

    def __init__(self, fixtures=None, strict: bool = False):
        if isinstance(fixtures, (str, bytes)) or hasattr(fixtures, "read_text"):
            with open(fixtures, "r", encoding="utf-8") as fh:
                fixtures = json.load(fh)
        self.fixtures = fixtures or {}
        self.strict = strict

    def chat(self, req: ChatRequest) -> str:
        from . import _stub_responses

        return _stub_responses.respond(req.messages[-1].content)

    def chat_text(self, prompt: str) -> str:
        return self.chat(ChatRequest.single(prompt))

    def embed(self, text: str) -> Embedding:
        if not text:
            raise EmptyTextError("cannot embed empty text")
        counts = _kernels.bow256(text)
        if not any(counts):
            raise EmptyTextError("no word tokens to embed")
        return normalize(counts)

    def web_search(self, query: str, limit: int) -> WebSearchResult:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        lowered = query.lower()
        hits = []
        seen_urls = set()
        matched = False
        for key in sorted(self.fixtures):
            if key.lower() in lowered:
                matched = True
                for h in self.fixtures[key]:
                    if h["url"] not in seen_urls:
                        seen_urls.add(h["url"])
                        hits.append(
                            SearchHit(
                                title=h.get("title", ""),
                                snippet=h.get("snippet", ""),
                                url=h["url"],
                                author_hint=h.get("author_hint"),
                            )
                        )
        if not matched and self.strict:
            raise NoFixtureError(f"no fixture key matches query: {query!r}")
        return WebSearchResult(query=query, hits=tuple(hits[:limit]))


class HttpProvider:
    """OpenAI-compatible HTTP provider with bounded retries.

    Transient failures (HTTP 429/5xx, connection errors) are retried up
    to `max_attempts` with strictly increasing backoff delays; auth
    failures are raised immediately.
    """

    kind = "http"

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        model: str = "gpt-4.1",
        embed_model: str = "text-embedding-3-small",
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        max_in_flight: int = 4,
        timeout: float = 60.0,
        sleep=time.sleep,
        session=None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.embed_model = embed_model
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._sleep = sleep
        self._session = session or requests.Session()
        self._gate = threading.Semaphore(max_in_flight)

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt > 0:
                # 0.5s, 1.0s, 2.0s, ... strictly increasing
                self._sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    response = self._session.post(
                        f"{self.base_url}{path}",
                        headers=self._headers(),
                        json=payload,
                        timeout=self.timeout,
                    )
            except requests.RequestException as exc:
                last_error = ProviderError(f"request failed: {exc}")
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"provider rejected credential (HTTP {response.status_code})")
            if response.status_code == 429:
                last_error = RateLimitedError("provider rate limit (HTTP 429)")
                continue
            if response.status_code >= 500:
                last_error = ProviderError(f"provider error (HTTP {response.status_code})")
                continue
            if response.status_code != 200:
                raise ProviderError(f"unexpected HTTP {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise MalformedResponseError(f"response body is not JSON: {exc}") from exc
        raise last_error

    def chat(self, req: ChatRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        body = self._post("/v1/chat/completions", payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"chat response missing content: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("chat content is not a string")
        return content

    def chat_text(self, prompt: str) -> str:
        return self.chat(ChatRequest.single(prompt))

    def embed(self, text: str) -> Embedding:
        if not text:
            raise EmptyTextError("cannot embed empty text")
        body = self._post("/v1/embeddings", {"model": self.embed_model, "input": text})
        try:
            vector = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"embedding response missing vector: {exc}") from exc
        if not isinstance(vector, list) or not vector:
            raise MalformedResponseError("embedding vector empty or not a list")
        return Embedding(tuple(float(v) for v in vector))

    def web_search(self, query: str, limit: int) -> WebSearchResult:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        body = self._post("/v1/search", {"query": query, "limit": limit})
        raw_hits = body.get("hits")
        if not isinstance(raw_hits, list):
            raise MalformedResponseError("search response missing hits list")
        hits = tuple(
            SearchHit(
                title=h.get("title", ""),
                snippet=h.get("snippet", ""),
                url=h.get("url", ""),
                author_hint=h.get("author_hint"),
            )
            for h in raw_hits[:limit]
        )
        return WebSearchResult(query=query, hits=hits)


def make_provider(config) -> StubProvider | HttpProvider:
    """Build a provider from a ProviderConfig (see stylorisk.config)."""
    if config.kind == "stub":
        return StubProvider(fixtures=config.fixtures_path, strict=config.strict_fixtures)
    if config.kind == "http":
        import os

        base_url = config.base_url or os.environ.get("STYLO_BASE_URL")
        if not base_url:
            raise ProviderError("http provider needs base_url or STYLO_BASE_URL")
        return HttpProvider(
            base_url=base_url,
            api_key=os.environ.get("STYLO_API_KEY"),
            model=config.model,
            embed_model=config.embed_model,
            max_attempts=config.max_attempts,
            backoff_base=config.backoff_base,
            max_in_flight=config.max_in_flight,
        )
    raise ValueError(f"unknown provider kind: {config.kind!r}")
