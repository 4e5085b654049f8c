"""Four-stage assessment pipeline: extract metadata, search candidates,
match candidates, reflect on the best match.

Runs in two modes: database-augmented (candidates from the profile
store, matched against aggregated author profiles) or zero-shot
(candidates proposed from web search, matched against fetched samples).
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from .config import PipelineConfig
from .defense import ReflectionEntry, ReflectionReport
from .errors import (
    EmptyCandidatesError,
    EmptyListError,
    EmptyStoreError,
    EmptyTextError,
    MetadataParseError,
    ParseError,
    StyloError,
)
from .matching import (
    ArticleContext,
    MatchReference,
    MatchResult,
    RefSample,
    VERDICT_UNCERTAIN,
    match_candidate,
)
from .prompts import extract_json, render_prompt
from .provider import ChatRequest
from .store import Article, content_terms
from .stylometry import (
    FEATURE_LABELS,
    NUMERIC_FEATURES,
    aggregate,
    compute_features,
    format_value,
)

_MONTHS = (
    "january february march april may june july august "
    "september october november december"
).split()
_MONTH_INDEX = {name: i + 1 for i, name in enumerate(_MONTHS)}
_MONTH_ALT = "|".join(_MONTHS)

_DATE_PATTERNS = (
    re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b"),
    re.compile(rf"\b({_MONTH_ALT})\s+(\d{{1,2}})(?:st|nd|rd|th)?\s*,?\s+(\d{{4}})\b", re.IGNORECASE),
    re.compile(rf"\b(\d{{1,2}})\s+({_MONTH_ALT})\s*,?\s+(\d{{4}})\b", re.IGNORECASE),
)


@dataclass(frozen=True)
class ArticleMetadata:
    topic_category: str = "unknown"
    publication_date: str | None = None
    publisher_origins: tuple[str, ...] = ()
    geo_location: str | None = None


@dataclass(frozen=True)
class Candidate:
    author_name: str
    retrieval_score: float
    sample_ids: tuple[str, ...] = ()
    samples: tuple[RefSample, ...] = ()


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[Candidate, ...]
    mode: str


@dataclass
class RiskReport:
    article_id: str
    mode: str
    strategy: str
    metadata: ArticleMetadata
    candidates: CandidateSet
    ranked_matches: list[MatchResult]
    reflection: ReflectionReport | None
    counters: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0

    def top_k_authors(self, k: int) -> list[str]:
        return [m.author_name for m in self.ranked_matches[:k]]

    def to_dict(self, include_timing: bool = True) -> dict:
        data = {
            "article_id": self.article_id,
            "mode": self.mode,
            "strategy": self.strategy,
            "metadata": {
                "topic_category": self.metadata.topic_category,
                "publication_date": self.metadata.publication_date,
                "publisher_origins": list(self.metadata.publisher_origins),
                "geo_location": self.metadata.geo_location,
            },
            "candidates": [
                {"author_name": c.author_name, "retrieval_score": c.retrieval_score}
                for c in self.candidates.candidates
            ],
            "ranked_matches": [m.to_dict() for m in self.ranked_matches],
            "reflection": self.reflection.to_dict() if self.reflection else None,
            "counters": dict(self.counters),
        }
        if include_timing:
            data["elapsed_ms"] = self.elapsed_ms
        return data


def _valid_date(year: int, month: int, day: int) -> str | None:
    import datetime

    try:
        return datetime.date(year, month, day).isoformat()
    except ValueError:
        return None


def _first_date(text: str) -> str | None:
    found = []
    for idx, pattern in enumerate(_DATE_PATTERNS):
        for m in pattern.finditer(text):
            groups = m.groups()
            if idx == 0:
                iso = _valid_date(int(groups[0]), int(groups[1]), int(groups[2]))
            elif idx == 1:
                iso = _valid_date(int(groups[2]), _MONTH_INDEX[groups[0].lower()], int(groups[1]))
            else:
                iso = _valid_date(int(groups[2]), _MONTH_INDEX[groups[1].lower()], int(groups[0]))
            if iso:
                found.append((m.start(), iso))
    return min(found)[1] if found else None


def heuristic_metadata(text: str, article: Article | None = None) -> ArticleMetadata:
    """Offline metadata extraction: first date-like string plus the
    highest-frequency content word as topic."""
    date = None
    topic = None
    publishers: tuple[str, ...] = ()
    if article is not None:
        date = article.date
        topic = article.topic
        if article.publication:
            publishers = (article.publication,)
    if not date:
        date = _first_date(text)
    if not topic:
        counts = content_terms(text)
        if counts:
            topic = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    return ArticleMetadata(
        topic_category=topic or "unknown",
        publication_date=date,
        publisher_origins=publishers,
        geo_location=None,
    )


def extract_metadata(article: Article, provider) -> ArticleMetadata:
    """Stage 1: metadata via provider chat (strict JSON, one retry) or,
    with the stub provider, via the offline heuristics."""
    if provider.kind == "stub":
        return heuristic_metadata(article.body, article)

    prompt = render_prompt("metadata", article_text=article.body)
    reply = provider.chat(ChatRequest.single(prompt))
    try:
        payload = _parse_metadata_reply(reply)
    except ParseError:
        retry = prompt + "\nYour previous reply was not valid JSON. Respond with only the JSON object."
        try:
            payload = _parse_metadata_reply(provider.chat(ChatRequest.single(retry)))
        except ParseError as exc:
            raise MetadataParseError(f"metadata reply unparseable after retry: {exc}") from exc

    topic = str(payload.get("topic_category") or "unknown")
    date = payload.get("publication_date")
    if date is not None:
        date = _first_date(str(date)) or None
    publishers = payload.get("publisher_origins") or []
    if not isinstance(publishers, list):
        publishers = [str(publishers)]
    geo = payload.get("geo_location")
    return ArticleMetadata(
        topic_category=topic,
        publication_date=date,
        publisher_origins=tuple(str(p) for p in publishers),
        geo_location=str(geo) if geo else None,
    )


def _parse_metadata_reply(reply: str) -> dict:
    payload = extract_json(reply)
    if not isinstance(payload, dict) or "topic_category" not in payload:
        raise ParseError("metadata reply missing topic_category")
    return payload


def build_article_context(article: Article, provider, semantic_source: str = "lexicon") -> ArticleContext:
    profile = compute_features(article.body, semantic_source, provider=provider)
    return ArticleContext(text=article.body, profile=profile, embedding=provider.embed(article.body))


def _metadata_block(metadata: ArticleMetadata) -> str:
    lines = [f"- topic: {metadata.topic_category}"]
    if metadata.publication_date:
        lines.append(f"- date: {metadata.publication_date}")
    if metadata.publisher_origins:
        lines.append(f"- publishers: {', '.join(metadata.publisher_origins)}")
    if metadata.geo_location:
        lines.append(f"- location: {metadata.geo_location}")
    return "\n".join(lines)


def _hits_block(hits) -> str:
    lines = []
    for h in hits:
        line = f"- {h.title} | {h.snippet} | {h.url}"
        if h.author_hint:
            line += f" | author: {h.author_hint}"
        lines.append(line)
    return "\n".join(lines) if lines else "(no results)"


def _zero_shot_candidates(article, metadata, n, provider, config) -> CandidateSet:
    query_parts = []
    if metadata.topic_category and metadata.topic_category != "unknown":
        query_parts.append(metadata.topic_category)
    if metadata.publication_date:
        query_parts.append(metadata.publication_date)
    query_parts.extend(metadata.publisher_origins)
    query = " ".join(query_parts) or article.title or article.body[:80]
    search = provider.web_search(query, limit=max(n, 10))

    prompt = render_prompt(
        "candidates",
        metadata_block=_metadata_block(metadata),
        hits_block=_hits_block(search.hits),
        n=str(n),
    )
    reply = provider.chat(ChatRequest.single(prompt))
    try:
        names = _parse_candidate_reply(reply)
    except ParseError:
        retry = prompt + "\nYour previous reply was not valid JSON. Respond with only the JSON array."
        names = _parse_candidate_reply(provider.chat(ChatRequest.single(retry)))
    names = names[:n]
    if not names:
        raise EmptyCandidatesError("no candidate authors proposed")

    candidates = []
    for i, name in enumerate(names):
        sample_hits = provider.web_search(f'articles by "{name}"', limit=config.samples_per_candidate)
        samples = []
        for h in sample_hits.hits:
            if not h.snippet:
                continue
            try:
                profile = compute_features(h.snippet, config.semantic_source, provider=provider)
            except EmptyTextError:
                continue
            samples.append(RefSample(text=h.snippet, profile=profile, embedding=provider.embed(h.snippet)))
        candidates.append(
            Candidate(
                author_name=name,
                retrieval_score=(len(names) - i) / len(names),
                samples=tuple(samples),
            )
        )
    return CandidateSet(candidates=tuple(candidates), mode="zero_shot")


def _parse_candidate_reply(reply: str) -> list[str]:
    payload = extract_json(reply)
    if not isinstance(payload, list):
        raise ParseError("candidate reply is not a JSON array")
    names = []
    for item in payload:
        name = str(item).strip()
        if name and name not in names:
            names.append(name)
    return names


def search_stage(article, metadata, n, mode, provider, store=None, config=None) -> CandidateSet:
    """Stage 2: candidate retrieval.

    Database mode falls back to zero-shot search when the store is empty
    or the best retrieval score is below the configured cutoff.
    """
    if n < 1:
        raise ValueError("candidate count must be >= 1")
    config = config or PipelineConfig()

    if mode == "db":
        if store is None:
            raise ValueError("db mode requires an open store")
        try:
            ranked = store.search_candidates(article, metadata, n)
        except EmptyStoreError:
            ranked = []
        if ranked and ranked[0][1] >= config.fallback_cutoff:
            candidates = tuple(
                Candidate(
                    author_name=name,
                    retrieval_score=score,
                    sample_ids=store.get_author(name).sample_ids,
                )
                for name, score in ranked
            )
            return CandidateSet(candidates=candidates, mode="db")
        return _zero_shot_candidates(article, metadata, n, provider, config)
    if mode == "zero_shot":
        return _zero_shot_candidates(article, metadata, n, provider, config)
    raise ValueError(f"unknown mode: {mode!r}")


def _db_reference(store, candidate: Candidate, strategy: str, config: PipelineConfig) -> MatchReference:
    record = store.get_author(candidate.author_name)
    samples = ()
    if strategy == "lda":
        texts = []
        for article_id in record.sample_ids[: config.samples_per_candidate]:
            texts.append(
                RefSample(
                    text=store.get_article(article_id).body,
                    profile=store.article_profile(article_id),
                    embedding=store.article_embedding(article_id),
                )
            )
        samples = tuple(texts)
    return MatchReference(
        name=record.name,
        aggregated=record.profile,
        centroid=record.centroid,
        samples=samples,
    )


def match_stage(
    article_ctx: ArticleContext,
    candidate_set: CandidateSet,
    strategy: str,
    provider,
    store=None,
    config: PipelineConfig | None = None,
) -> list[MatchResult]:
    """Stage 3: pairwise matching, ranked by likelihood descending with
    ascending author name as the tie-break."""
    if not candidate_set.candidates:
        raise EmptyCandidatesError("candidate set is empty")
    config = config or PipelineConfig()
    results = []
    for candidate in candidate_set.candidates:
        if candidate_set.mode == "db":
            reference = _db_reference(store, candidate, strategy, config)
        else:
            reference = MatchReference(name=candidate.author_name, samples=candidate.samples)
        try:
            result = match_candidate(
                article_ctx, reference, strategy, provider, config.decision_threshold
            )
        except EmptyListError:
            result = MatchResult(
                author_name=candidate.author_name,
                likelihood=0.0,
                verdict=VERDICT_UNCERTAIN,
                evidence={"all_failed": True, "reason": "no reference samples"},
                comparisons_made=0,
                reference=reference,
            )
        if result.evidence.get("parse_failures", 0) == result.comparisons_made and result.comparisons_made > 0 and result.likelihood == 0.0 and result.verdict == VERDICT_UNCERTAIN:
            result.evidence["all_failed"] = True
        results.append(result)
    results.sort(key=lambda r: (-r.likelihood, r.author_name))
    return results


def reflect_stage(article_profile, best_match: MatchResult, provider=None) -> ReflectionReport:
    """Stage 4: rank the nine numeric features by how closely the article
    tracks the matched author's habits (ascending z-score)."""
    reference = best_match.reference
    if reference is None:
        raise ValueError("best match carries no reference")
    if reference.aggregated is not None:
        means, stds = reference.aggregated.means, reference.aggregated.stds
    elif reference.samples:
        agg = aggregate([s.profile for s in reference.samples])
        means, stds = agg.means, agg.stds
    else:
        raise ValueError("reference has neither aggregate nor samples")

    order = {name: i for i, name in enumerate(NUMERIC_FEATURES)}
    entries = []
    from .stylometry import z_scores

    distance = z_scores(article_profile, means, stds)
    for name in sorted(NUMERIC_FEATURES, key=lambda f: (distance.z_scores[f], order[f])):
        z = distance.z_scores[name]
        value = float(getattr(article_profile, name))
        entries.append(
            ReflectionEntry(
                feature_name=name,
                z_score=z,
                article_value=value,
                author_mean=means[name],
                author_std=stds[name],
                explanation=(
                    f"{FEATURE_LABELS[name]} of {format_value(name, value)} sits "
                    f"{z:.2f} standard deviations from {best_match.author_name}'s "
                    f"habitual {means[name]:.4f}"
                ),
            )
        )

    rationale = None
    if provider is not None:
        features_block = "\n".join(
            f"{i + 1}. {e.explanation}" for i, e in enumerate(entries)
        )
        rationale = provider.chat(
            ChatRequest.single(
                render_prompt(
                    "reflection",
                    features_block=features_block,
                    author=best_match.author_name,
                )
            )
        )
    return ReflectionReport(
        identifying_features=tuple(entries),
        matched_author=best_match.author_name,
        rationale=rationale,
    )


def _tag_stage(exc: Exception, stage: str):
    if isinstance(exc, StyloError) and not hasattr(exc, "stage"):
        exc.stage = stage
    raise exc


def assess(article: Article, config: PipelineConfig, provider=None, store=None) -> RiskReport:
    """Run all four stages and produce a ranked risk report.

    Assessment is read-only with respect to the store.
    """
    from .provider import make_provider

    provider = provider or make_provider(config.provider)
    if store is None and config.mode == "db" and config.store_path:
        from .store import ProfileStore

        store = ProfileStore(config.store_path, provider, alpha=config.alpha, create=False)

    started = time.perf_counter()
    try:
        metadata = extract_metadata(article, provider)
    except Exception as exc:
        _tag_stage(exc, "extract")
    try:
        candidate_set = search_stage(
            article, metadata, config.candidates_n, config.mode, provider, store, config
        )
    except Exception as exc:
        _tag_stage(exc, "search")
    try:
        article_ctx = build_article_context(article, provider, config.semantic_source)
        ranked = match_stage(article_ctx, candidate_set, config.strategy, provider, store, config)
    except Exception as exc:
        _tag_stage(exc, "match")
    try:
        reflection = reflect_stage(article_ctx.profile, ranked[0], provider)
    except Exception as exc:
        _tag_stage(exc, "reflect")

    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return RiskReport(
        article_id=article.id,
        mode=candidate_set.mode,
        strategy=config.strategy,
        metadata=metadata,
        candidates=candidate_set,
        ranked_matches=ranked,
        reflection=reflection,
        counters={
            "candidates": len(candidate_set.candidates),
            "comparisons": sum(m.comparisons_made for m in ranked),
        },
        elapsed_ms=elapsed_ms,
    )
