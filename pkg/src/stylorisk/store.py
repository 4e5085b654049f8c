"""Persistent author-profile store.

Directory layout: manifest.json + articles.jsonl + authors.jsonl + a
writer lock file.  Articles keep their per-sample feature profile and
embedding inline, so author aggregates can always be rebuilt exactly
from stored values; candidate retrieval combines keyword Jaccard overlap
with embedding cosine against the author centroid.
"""

from __future__ import annotations

import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import (
    EmptyStoreError,
    EmptyTextError,
    MissingAuthorError,
    NotFoundError,
    StoreError,
    StoreLockedError,
)
from .provider import Embedding, cosine
from .stylometry import (
    AggregatedProfile,
    StylometricProfile,
    aggregate,
    aggregated_from_dict,
    aggregated_to_dict,
    compute_features,
    profile_from_dict,
    profile_to_dict,
)
from .textcore import TokenKind, is_stopword, tokenize

log = logging.getLogger(__name__)

STORE_VERSION = 1
DEFAULT_ALPHA = 0.5
DEFAULT_KEYWORD_K = 20


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    body: str
    author: str | None = None
    date: str | None = None
    publication: str | None = None
    topic: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("article id must be non-empty")
        if not self.body:
            raise ValueError("article body must be non-empty")


@dataclass(frozen=True)
class AuthorRecord:
    name: str
    sample_ids: tuple[str, ...]
    profile: AggregatedProfile
    centroid: Embedding
    keywords: tuple[str, ...]


@dataclass(frozen=True)
class StoreManifest:
    version: int
    embedding_dim: int
    author_count: int
    article_count: int
    created_at: str
    updated_at: str


@dataclass
class WarmupSummary:
    authors_added: int = 0
    articles_added: int = 0
    skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)


def content_terms(text: str) -> Counter:
    """Lower-cased non-stopword word counts of a text."""
    counts = Counter()
    for tok in tokenize(text):
        if tok.kind is TokenKind.WORD and not is_stopword(tok.lower):
            counts[tok.lower] += 1
    return counts


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class _AuthorState:
    __slots__ = ("sample_ids", "term_counts", "profile", "centroid", "keywords")

    def __init__(self):
        self.sample_ids: list[str] = []
        self.term_counts: Counter = Counter()
        self.profile: AggregatedProfile | None = None
        self.centroid: Embedding | None = None
        self.keywords: tuple[str, ...] = ()


class ProfileStore:
    """Author-profile database with warm-up ingestion and retrieval."""

    def __init__(
        self,
        path,
        provider,
        alpha: float = DEFAULT_ALPHA,
        keyword_k: int = DEFAULT_KEYWORD_K,
        create: bool = True,
    ):
        self.path = Path(path)
        self.provider = provider
        self.alpha = alpha
        self.keyword_k = keyword_k
        self._articles: dict[str, dict] = {}
        self._authors: dict[str, _AuthorState] = {}
        self._df: Counter | None = None
        self._embedding_dim: int | None = None
        self._created_at = _now()
        self._updated_at = self._created_at
        if self.path.exists() and (self.path / "manifest.json").exists():
            self._load()
        elif create:
            self.path.mkdir(parents=True, exist_ok=True)
        else:
            raise StoreError(f"no store at {self.path}")

    # -- locking -------------------------------------------------------

    @property
    def _lock_path(self) -> Path:
        return self.path / ".lock"

    def _acquire_lock(self):
        try:
            fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLockedError(f"store is locked: {self._lock_path}") from None
        os.close(fd)

    def _release_lock(self):
        try:
            os.unlink(self._lock_path)
        except FileNotFoundError:
            pass

    # -- persistence ---------------------------------------------------

    def _load(self):
        manifest = json.loads((self.path / "manifest.json").read_text("utf-8"))
        if manifest["version"] != STORE_VERSION:
            raise StoreError(f"unsupported store version {manifest['version']}")
        self._embedding_dim = manifest["embedding_dim"] or None
        self._created_at = manifest["created_at"]
        self._updated_at = manifest["updated_at"]

        articles_path = self.path / "articles.jsonl"
        if articles_path.exists():
            with articles_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    record = json.loads(line)
                    self._articles[record["id"]] = record

        authors_path = self.path / "authors.jsonl"
        if authors_path.exists():
            with authors_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    record = json.loads(line)
                    state = _AuthorState()
                    state.sample_ids = list(record["sample_ids"])
                    state.term_counts = Counter(record["term_counts"])
                    state.profile = aggregated_from_dict(record["profile"])
                    state.centroid = Embedding(tuple(record["centroid"]))
                    state.keywords = tuple(record["keywords"])
                    self._authors[record["name"]] = state

    def save(self):
        self.path.mkdir(parents=True, exist_ok=True)
        self._updated_at = _now()
        with (self.path / "articles.jsonl").open("w", encoding="utf-8") as fh:
            for article_id in sorted(self._articles):
                fh.write(json.dumps(self._articles[article_id], sort_keys=True) + "\n")
        with (self.path / "authors.jsonl").open("w", encoding="utf-8") as fh:
            for name in sorted(self._authors):
                state = self._authors[name]
                fh.write(
                    json.dumps(
                        {
                            "name": name,
                            "sample_ids": state.sample_ids,
                            "term_counts": dict(state.term_counts),
                            "profile": aggregated_to_dict(state.profile),
                            "centroid": list(state.centroid.vector),
                            "keywords": list(state.keywords),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
        (self.path / "manifest.json").write_text(
            json.dumps(
                {
                    "version": STORE_VERSION,
                    "embedding_dim": self._embedding_dim or 0,
                    "author_count": len(self._authors),
                    "article_count": len(self._articles),
                    "created_at": self._created_at,
                    "updated_at": self._updated_at,
                },
                sort_keys=True,
                indent=2,
            ),
            "utf-8",
        )

    # -- ingestion -----------------------------------------------------

    def warm_up(self, articles, exclude_authors=(), semantic_source: str = "lexicon") -> WarmupSummary:
        """Ingest articles with bylines; idempotent on duplicate ids.

        Authors named in exclude_authors are skipped entirely, which
        simulates a database that deliberately omits some authors.
        """
        excluded = {name.lower() for name in exclude_authors}
        summary = WarmupSummary()
        self._df = None
        self._acquire_lock()
        try:
            for article in articles:
                if article.id in self._articles:
                    summary.skipped += 1
                    summary.skip_reasons["duplicate_id"] += 1
                    continue
                if not article.author:
                    summary.skipped += 1
                    summary.skip_reasons["missing_author"] += 1
                    log.warning("article %s skipped: %s", article.id, MissingAuthorError("no byline"))
                    continue
                if article.author.lower() in excluded:
                    summary.skipped += 1
                    summary.skip_reasons["excluded_author"] += 1
                    continue
                try:
                    profile = compute_features(article.body, semantic_source, provider=self.provider)
                except EmptyTextError:
                    summary.skipped += 1
                    summary.skip_reasons["empty_text"] += 1
                    continue
                embedding = self.provider.embed(article.body)
                if self._embedding_dim is None:
                    self._embedding_dim = embedding.dim
                elif embedding.dim != self._embedding_dim:
                    raise StoreError(
                        f"embedding dim {embedding.dim} != store dim {self._embedding_dim}"
                    )

                record = {
                    "id": article.id,
                    "title": article.title,
                    "body": article.body,
                    "author": article.author,
                    "date": article.date,
                    "publication": article.publication,
                    "topic": article.topic,
                    "features": profile_to_dict(profile),
                    "embedding": list(embedding.vector),
                }
                self._articles[article.id] = record

                state = self._authors.get(article.author)
                if state is None:
                    state = _AuthorState()
                    self._authors[article.author] = state
                    summary.authors_added += 1
                state.sample_ids.append(article.id)
                state.term_counts.update(content_terms(article.body))
                self._rebuild_author(state)
                summary.articles_added += 1

            self._refresh_keywords()
            self.save()
        finally:
            self._release_lock()
        return summary

    def _rebuild_author(self, state: _AuthorState):
        profiles = [profile_from_dict(self._articles[i]["features"]) for i in state.sample_ids]
        state.profile = aggregate(profiles)
        dim = len(self._articles[state.sample_ids[0]]["embedding"])
        sums = [0.0] * dim
        for article_id in state.sample_ids:
            vector = self._articles[article_id]["embedding"]
            for i in range(dim):
                sums[i] += vector[i]
        n = len(state.sample_ids)
        mean = [s / n for s in sums]
        norm = math.sqrt(sum(v * v for v in mean))
        state.centroid = Embedding(tuple(v / norm for v in mean))

    def _document_frequencies(self) -> Counter:
        if self._df is None:
            df = Counter()
            for state in self._authors.values():
                df.update(set(state.term_counts))
            self._df = df
        return self._df

    def _idf(self, term: str) -> float:
        df = self._document_frequencies()[term]
        return math.log((1 + len(self._authors)) / (1 + df)) + 1.0

    def _refresh_keywords(self):
        self._df = None
        for state in self._authors.values():
            scored = sorted(
                state.term_counts.items(),
                key=lambda item: (-item[1] * self._idf(item[0]), item[0]),
            )
            state.keywords = tuple(term for term, _ in scored[: self.keyword_k])

    # -- retrieval -----------------------------------------------------

    def article_keywords(self, article: Article, metadata=None) -> set[str]:
        """Query-side keyword set: every content term plus metadata terms.

        Author records keep only their top-k TF-IDF terms; the query side
        stays unpruned so any shared vocabulary is visible to the Jaccard
        signal.
        """
        keywords = set(content_terms(article.body))
        extra_text = []
        if metadata is not None:
            if metadata.topic_category and metadata.topic_category != "unknown":
                extra_text.append(metadata.topic_category)
            extra_text.extend(metadata.publisher_origins)
        for chunk in extra_text:
            for tok in tokenize(chunk):
                if tok.kind is TokenKind.WORD and not is_stopword(tok.lower):
                    keywords.add(tok.lower)
        return keywords

    def search_candidates(self, article: Article, metadata=None, n: int = 20):
        """Rank authors by alpha*jaccard(keywords) + (1-alpha)*cosine(centroid)."""
        if not self._authors:
            raise EmptyStoreError("store has no authors")
        if n < 1:
            raise ValueError("n must be >= 1")
        embedding = self.provider.embed(article.body)
        article_kw = self.article_keywords(article, metadata)
        scores = []
        for name in sorted(self._authors):
            state = self._authors[name]
            author_kw = set(state.keywords)
            union = article_kw | author_kw
            jaccard = len(article_kw & author_kw) / len(union) if union else 0.0
            sim = cosine(embedding, state.centroid)
            scores.append((self.alpha * jaccard + (1.0 - self.alpha) * sim, name))
        scores.sort(key=lambda item: (-item[0], item[1]))
        return [(name, score) for score, name in scores[:n]]

    # -- lookups -------------------------------------------------------

    def get_author(self, name: str) -> AuthorRecord:
        state = self._authors.get(name)
        if state is None:
            raise NotFoundError(f"unknown author: {name!r}")
        return AuthorRecord(
            name=name,
            sample_ids=tuple(state.sample_ids),
            profile=state.profile,
            centroid=state.centroid,
            keywords=state.keywords,
        )

    def get_article(self, article_id: str) -> Article:
        record = self._articles.get(article_id)
        if record is None:
            raise NotFoundError(f"unknown article: {article_id!r}")
        return Article(
            id=record["id"],
            title=record["title"],
            body=record["body"],
            author=record["author"],
            date=record["date"],
            publication=record["publication"],
            topic=record["topic"],
        )

    def article_profile(self, article_id: str) -> StylometricProfile:
        record = self._articles.get(article_id)
        if record is None:
            raise NotFoundError(f"unknown article: {article_id!r}")
        return profile_from_dict(record["features"])

    def article_embedding(self, article_id: str) -> Embedding:
        record = self._articles.get(article_id)
        if record is None:
            raise NotFoundError(f"unknown article: {article_id!r}")
        return Embedding(tuple(record["embedding"]))

    def list_authors(self) -> list[str]:
        return sorted(self._authors)

    def stats(self) -> StoreManifest:
        return StoreManifest(
            version=STORE_VERSION,
            embedding_dim=self._embedding_dim or 0,
            author_count=len(self._authors),
            article_count=len(self._articles),
            created_at=self._created_at,
            updated_at=self._updated_at,
        )
