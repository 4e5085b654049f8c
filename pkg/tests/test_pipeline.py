"""Pipeline stages: metadata heuristics and parsing, candidate search in
both modes, match ranking, reflection ordering, full assessment."""

import json

import pytest

from stylorisk.config import PipelineConfig
from stylorisk.errors import EmptyCandidatesError, MetadataParseError
from stylorisk.matching import MatchResult
from stylorisk.pipeline import (
    ArticleMetadata,
    assess,
    build_article_context,
    extract_metadata,
    heuristic_metadata,
    match_stage,
    reflect_stage,
    search_stage,
)
from stylorisk.provider import StubProvider
from stylorisk.store import Article
from stylorisk.stylometry import NUMERIC_FEATURES


class ScriptedProvider(StubProvider):
    kind = "http"  # force the provider path in extract_metadata

    def __init__(self, replies):
        super().__init__()
        self.replies = list(replies)

    def chat(self, req):
        if not self.replies:
            raise AssertionError("no scripted reply left")
        return self.replies.pop(0)


def _article(body, **kwargs):
    defaults = dict(id="q-1", title="Query", body=body)
    defaults.update(kwargs)
    return Article(**defaults)


# -- metadata ---------------------------------------------------------------


def test_heuristic_date_extraction():
    meta = heuristic_metadata("WASHINGTON, March 3, 2020 - Officials announced a plan.")
    assert meta.publication_date == "2020-03-03"


def test_heuristic_date_formats():
    assert heuristic_metadata("Report of 2021-11-30 here.").publication_date == "2021-11-30"
    assert heuristic_metadata("Dated 7 July 1999 in print.").publication_date == "1999-07-07"
    assert heuristic_metadata("Published March 41, 2020 nope.").publication_date is None


def test_heuristic_topic_highest_frequency_content_word():
    meta = heuristic_metadata("Budget talks continue. The budget grows. Budget fans cheer.")
    assert meta.topic_category == "budget"


def test_heuristic_empty_fallback():
    meta = heuristic_metadata("!!!")
    assert meta.topic_category == "unknown"
    assert meta.publication_date is None


def test_extract_metadata_stub_uses_article_fields(stub_provider):
    article = _article("Some plain text.", date="2020-01-02", topic="energy", publication="The Sun")
    meta = extract_metadata(article, stub_provider)
    assert meta.publication_date == "2020-01-02"
    assert meta.topic_category == "energy"
    assert meta.publisher_origins == ("The Sun",)


def test_extract_metadata_provider_parses_json():
    provider = ScriptedProvider(
        ['{"topic_category": "science", "publication_date": "2022-05-01", "publisher_origins": ["AP"], "geo_location": "Berlin"}']
    )
    meta = extract_metadata(_article("body text here."), provider)
    assert meta == ArticleMetadata(
        topic_category="science",
        publication_date="2022-05-01",
        publisher_origins=("AP",),
        geo_location="Berlin",
    )


def test_extract_metadata_retry_then_error():
    provider = ScriptedProvider(["not json", "also not json"])
    with pytest.raises(MetadataParseError):
        extract_metadata(_article("body."), provider)


def test_extract_metadata_retry_then_success():
    provider = ScriptedProvider(["garbage", '{"topic_category": "arts"}'])
    meta = extract_metadata(_article("body."), provider)
    assert meta.topic_category == "arts"


# -- search stage -------------------------------------------------------------


def test_search_stage_requires_positive_n(stub_provider, small_store):
    with pytest.raises(ValueError):
        search_stage(_article("text"), ArticleMetadata(), 0, "db", stub_provider, small_store)


def test_search_db_self_retrieval(stub_provider, small_store, small_corpus, base_config):
    train, _ = small_corpus
    article = train[0]
    cs = search_stage(article, ArticleMetadata(), 6, "db", stub_provider, small_store, base_config)
    assert cs.mode == "db"
    assert cs.candidates[0].author_name == article.author
    scores = [c.retrieval_score for c in cs.candidates]
    assert scores == sorted(scores, reverse=True)


def test_search_db_fallback_to_zero_shot_on_empty_store(tmp_path, base_config):
    from stylorisk.store import ProfileStore

    fixtures = {
        "mystery": [
            {"title": "t", "snippet": "A long enough snippet of text to profile.", "url": "u1", "author_hint": "Pat Quill"}
        ],
        "pat quill": [
            {"title": "s", "snippet": "Sample text by the candidate for matching.", "url": "u2"}
        ],
    }
    provider = StubProvider(fixtures=fixtures)
    empty_store = ProfileStore(tmp_path / "empty", provider)
    cs = search_stage(
        _article("Mystery text."),
        ArticleMetadata(topic_category="mystery"),
        5,
        "db",
        provider,
        empty_store,
        base_config,
    )
    assert cs.mode == "zero_shot"
    assert [c.author_name for c in cs.candidates] == ["Pat Quill"]


def test_search_zero_shot_supply_limited(base_config):
    hits = [
        {"title": f"t{i}", "snippet": "text", "url": f"u{i}", "author_hint": f"Writer {i}"}
        for i in range(3)
    ]
    provider = StubProvider(fixtures={"economy": hits})
    cs = search_stage(
        _article("About the economy."),
        ArticleMetadata(topic_category="economy"),
        20,
        "zero_shot",
        provider,
        None,
        base_config,
    )
    assert len(cs.candidates) == 3
    assert cs.mode == "zero_shot"


def test_search_zero_shot_empty_candidates(base_config):
    provider = StubProvider(fixtures={})
    with pytest.raises(EmptyCandidatesError):
        search_stage(
            _article("nothing matches."), ArticleMetadata(), 5, "zero_shot", provider, None, base_config
        )


def test_search_zero_shot_fetches_samples_per_candidate(base_config):
    fixtures = {
        "energy": [{"title": "t", "snippet": "x", "url": "u0", "author_hint": "Sam Ward"}],
        "sam ward": [
            {"title": f"s{i}", "snippet": f"Sample snippet number {i} long enough to use.", "url": f"w{i}"}
            for i in range(8)
        ],
    }
    provider = StubProvider(fixtures=fixtures)
    cs = search_stage(
        _article("energy news"),
        ArticleMetadata(topic_category="energy"),
        5,
        "zero_shot",
        provider,
        None,
        base_config,
    )
    assert len(cs.candidates[0].samples) == base_config.samples_per_candidate


# -- match stage ----------------------------------------------------------------


def test_match_stage_orders_by_likelihood(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    article = held[0]
    ctx = build_article_context(article, stub_provider)
    cs = search_stage(article, ArticleMetadata(), 6, "db", stub_provider, small_store, base_config)
    ranked = match_stage(ctx, cs, "sala", stub_provider, small_store, base_config)
    assert ranked[0].author_name == article.author
    likelihoods = [m.likelihood for m in ranked]
    assert likelihoods == sorted(likelihoods, reverse=True)


def test_match_stage_db_comparisons_equal_candidates(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    ctx = build_article_context(held[0], stub_provider)
    cs = search_stage(held[0], ArticleMetadata(), 6, "db", stub_provider, small_store, base_config)
    ranked = match_stage(ctx, cs, "sala", stub_provider, small_store, base_config)
    assert sum(m.comparisons_made for m in ranked) == len(cs.candidates)


def test_match_stage_zero_shot_comparisons_scale_with_samples(base_config):
    fixtures = {
        "energy": [
            {"title": "t", "snippet": "x", "url": "u0", "author_hint": "Sam Ward"},
            {"title": "t2", "snippet": "y", "url": "u1", "author_hint": "Ada Pole"},
        ],
        "sam ward": [
            {"title": f"s{i}", "snippet": f"Sample snippet number {i} with words.", "url": f"w{i}"}
            for i in range(5)
        ],
        "ada pole": [
            {"title": f"a{i}", "snippet": f"Another snippet number {i} with words.", "url": f"a{i}"}
            for i in range(5)
        ],
    }
    provider = StubProvider(fixtures=fixtures)
    article = _article("energy news story")
    cs = search_stage(
        article, ArticleMetadata(topic_category="energy"), 5, "zero_shot", provider, None, base_config
    )
    ctx = build_article_context(article, provider)
    ranked = match_stage(ctx, cs, "sala", provider, None, base_config)
    expected = len(cs.candidates) * base_config.samples_per_candidate
    assert sum(m.comparisons_made for m in ranked) == expected


def test_match_stage_empty_candidates_error(stub_provider, base_config):
    from stylorisk.pipeline import CandidateSet

    ctx = build_article_context(_article("some text here."), stub_provider)
    with pytest.raises(EmptyCandidatesError):
        match_stage(ctx, CandidateSet(candidates=(), mode="db"), "sala", stub_provider, None, base_config)


# -- reflection -------------------------------------------------------------------


def test_reflect_orders_by_ascending_z(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    ctx = build_article_context(held[0], stub_provider)
    cs = search_stage(held[0], ArticleMetadata(), 6, "db", stub_provider, small_store, base_config)
    ranked = match_stage(ctx, cs, "sala", stub_provider, small_store, base_config)
    report = reflect_stage(ctx.profile, ranked[0], stub_provider)
    zs = [e.z_score for e in report.identifying_features]
    assert zs == sorted(zs)
    assert len(report.identifying_features) == 9
    assert report.matched_author == ranked[0].author_name
    assert report.rationale


def test_reflect_ties_break_in_feature_order(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    ctx = build_article_context(held[0], stub_provider)
    cs = search_stage(held[0], ArticleMetadata(), 6, "db", stub_provider, small_store, base_config)
    ranked = match_stage(ctx, cs, "sala", stub_provider, small_store, base_config)
    report = reflect_stage(ctx.profile, ranked[0], stub_provider)
    tied_zero = [e.feature_name for e in report.identifying_features if e.z_score == 0.0]
    canonical = [name for name in NUMERIC_FEATURES if name in tied_zero]
    assert tied_zero == canonical


def test_reflect_requires_reference(stub_provider, small_corpus):
    ctx = build_article_context(small_corpus[1][0], stub_provider)
    orphan = MatchResult("x", 0.5, "same", {}, 1, reference=None)
    with pytest.raises(ValueError):
        reflect_stage(ctx.profile, orphan, stub_provider)


# -- assess ------------------------------------------------------------------------


def test_assess_end_to_end(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    article = held[0]
    report = assess(article, base_config, provider=stub_provider, store=small_store)
    assert report.top_k_authors(1) == [article.author]
    assert report.counters["comparisons"] == len(report.candidates.candidates)
    assert report.mode == "db"
    assert report.reflection is not None


def test_assess_does_not_mutate_store(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    before = small_store.stats()
    assess(held[0], base_config, provider=stub_provider, store=small_store)
    after = small_store.stats()
    assert (before.article_count, before.author_count) == (after.article_count, after.author_count)
    assert before.updated_at == after.updated_at


def test_assess_stage_tagging(tmp_path, base_config):
    from stylorisk.store import ProfileStore

    provider = StubProvider(fixtures={})
    empty_store = ProfileStore(tmp_path / "db", provider)
    with pytest.raises(EmptyCandidatesError) as excinfo:
        assess(_article("mystery text."), base_config, provider=provider, store=empty_store)
    assert excinfo.value.stage == "search"


def test_assess_top_k_prefix_property(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    report = assess(held[3], base_config, provider=stub_provider, store=small_store)
    for k1 in range(1, 6):
        for k2 in range(k1, 7):
            assert report.top_k_authors(k1) == report.top_k_authors(k2)[:k1]


def test_assess_deterministic_minus_timing(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    r1 = assess(held[1], base_config, provider=stub_provider, store=small_store)
    r2 = assess(held[1], base_config, provider=stub_provider, store=small_store)
    d1 = json.dumps(r1.to_dict(include_timing=False), sort_keys=True)
    d2 = json.dumps(r2.to_dict(include_timing=False), sort_keys=True)
    assert d1 == d2
