"""Defense module: suggestion planning, recompose prompt shape, rule-based
rewriting effects, and the utility floor."""

import pytest

from stylorisk.defense import (
    DefenseOutcome,
    ReflectionEntry,
    ReflectionReport,
    RewritePlan,
    apply_defense,
    build_recompose_prompt,
    build_suggestions,
    directive_table,
    rule_based_rewrite,
    simple_paraphrase,
)
from stylorisk.errors import UtilityBelowFloorError
from stylorisk.matching import MatchReference
from stylorisk.pipeline import assess, build_article_context
from stylorisk.stylometry import NUMERIC_FEATURES, aggregate, compute_features


def _entry(name, z):
    return ReflectionEntry(
        feature_name=name, z_score=z, article_value=1.0, author_mean=1.0,
        author_std=0.1, explanation="",
    )


def _report(*pairs):
    return ReflectionReport(
        identifying_features=tuple(_entry(n, z) for n, z in pairs),
        matched_author="author00",
    )


# -- build_suggestions ------------------------------------------------------


def test_top_feature_maps_to_its_directive():
    plan = build_suggestions(_report(("avg_sentence_length", 0.0), ("flesch_score", 3.0)), k=1)
    assert plan.suggestions == ("vary sentence lengths: split long sentences, merge short ones",)
    assert plan.target_features == ("avg_sentence_length",)


def test_k_truncates_in_rank_order():
    plan = build_suggestions(
        _report(("hapax_ratio", 0.1), ("punctuation_count", 0.5), ("flesch_score", 2.0)), k=3
    )
    assert len(plan.suggestions) == 3
    assert plan.suggestions[0] == "substitute distinctive rare words with common synonyms"
    assert "change punctuation habits" in plan.suggestions[1]


def test_k_beyond_available_clamps():
    plan = build_suggestions(_report(("hapax_ratio", 0.1), ("flesch_score", 2.0)), k=99)
    assert len(plan.suggestions) == 2


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        build_suggestions(_report(("hapax_ratio", 0.1)), k=0)


def test_directive_table_covers_all_numeric_features():
    table = directive_table()
    assert set(table) == set(NUMERIC_FEATURES)


def test_reflection_report_requires_entries():
    with pytest.raises(ValueError):
        ReflectionReport(identifying_features=(), matched_author="x")


def test_rewrite_plan_validation():
    with pytest.raises(ValueError):
        RewritePlan(suggestions=(), target_features=())
    with pytest.raises(ValueError):
        RewritePlan(suggestions=("s",), target_features=("f",), utility_floor=1.5)


# -- build_recompose_prompt ---------------------------------------------------


def test_recompose_prompt_contains_instruction_sentence():
    plan = build_suggestions(_report(("hapax_ratio", 0.1)), k=1)
    prompt = build_recompose_prompt("Body text.", plan)
    assert "Rewrite this article, follow these suggestions closely." in prompt
    assert "Preserve all factual content." in prompt
    assert "Body text." in prompt


def test_recompose_prompt_numbered_lines():
    plan = build_suggestions(_report(("hapax_ratio", 0.1), ("stopword_count", 0.2)), k=2)
    prompt = build_recompose_prompt("Body.", plan)
    numbered = [line for line in prompt.splitlines() if line[:3] in ("1. ", "2. ", "3. ")]
    assert len(numbered) == 2


def test_recompose_prompt_deterministic():
    plan = build_suggestions(_report(("hapax_ratio", 0.1)), k=1)
    assert build_recompose_prompt("Same.", plan) == build_recompose_prompt("Same.", plan)


# -- rule_based_rewrite --------------------------------------------------------


SAMPLE = (
    "The kestrel circled the quiet meadow before dawn. A farmer watched the bird "
    "with patient eyes, noting every turn. The kestrel dropped suddenly, and the "
    "field mouse vanished into the burrow. Later the farmer wrote careful notes "
    "about the hunt in his weathered journal."
)


def test_empty_targets_is_identity():
    assert rule_based_rewrite(SAMPLE, ()) == SAMPLE


def test_lexical_targets_reduce_hapaxes():
    rewritten = rule_based_rewrite(SAMPLE, ("hapax_ratio",))
    assert rewritten != SAMPLE
    before = compute_features(SAMPLE, "lexicon")
    after = compute_features(rewritten, "lexicon")
    assert after.unique_word_count < before.unique_word_count


def test_sentence_targets_change_sentence_length():
    rewritten = rule_based_rewrite(SAMPLE, ("avg_sentence_length",))
    before = compute_features(SAMPLE, "lexicon")
    after = compute_features(rewritten, "lexicon")
    assert after.avg_sentence_length != pytest.approx(before.avg_sentence_length)


def test_stopword_targets_change_stopword_count():
    rewritten = rule_based_rewrite(SAMPLE, ("stopword_count",))
    before = compute_features(SAMPLE, "lexicon")
    after = compute_features(rewritten, "lexicon")
    assert after.stopword_count > before.stopword_count


def test_punctuation_targets_change_punctuation():
    rewritten = rule_based_rewrite(SAMPLE, ("punctuation_count",))
    before = compute_features(SAMPLE, "lexicon")
    after = compute_features(rewritten, "lexicon")
    assert after.punctuation_count != before.punctuation_count


def test_rewrite_deterministic():
    targets = ("hapax_ratio", "avg_sentence_length", "stopword_count")
    assert rule_based_rewrite(SAMPLE, targets) == rule_based_rewrite(SAMPLE, targets)


def test_simple_paraphrase_swaps_synonyms():
    text = "The big house was quiet and the small garden looked beautiful."
    rewritten = simple_paraphrase(text)
    assert rewritten != text
    assert "large" in rewritten


# -- apply_defense ---------------------------------------------------------------


def _reference_for(text, stub_provider):
    profile = compute_features(text, "lexicon")
    return MatchReference(
        name="author00",
        aggregated=aggregate([profile]),
        centroid=stub_provider.embed(text),
    )


def test_identity_rewrite_keeps_likelihood(stub_provider):
    reference = _reference_for(SAMPLE, stub_provider)
    plan = RewritePlan(suggestions=("noop",), target_features=(), utility_floor=0.5)
    outcome = apply_defense(SAMPLE, plan, reference, stub_provider, mode="rule_based")
    assert outcome.rewritten_text == SAMPLE
    assert outcome.utility_score == pytest.approx(1.0, abs=1e-9)
    assert outcome.post_likelihood == pytest.approx(outcome.pre_likelihood, abs=1e-6)


def test_rule_based_decreases_likelihood_on_fixture(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    for article in held[:6]:
        report = assess(article, base_config, provider=stub_provider, store=small_store)
        plan = build_suggestions(report.reflection, 3)
        outcome = apply_defense(
            article.body, plan, report.ranked_matches[0].reference, stub_provider, mode="rule_based"
        )
        assert outcome.post_likelihood < outcome.pre_likelihood
        assert outcome.utility_score >= 0.85


def test_unrelated_rewrite_rejected_below_floor(stub_provider):
    reference = _reference_for(SAMPLE, stub_provider)

    class VandalProvider:
        kind = "stub"

        def chat(self, req):
            return "Totally unrelated gibberish text zz qq ww ee rr tt yy uu ii oo pp."

        def embed(self, text):
            return stub_provider.embed(text)

    plan = RewritePlan(
        suggestions=("anything",), target_features=("hapax_ratio",), utility_floor=0.85
    )
    with pytest.raises(UtilityBelowFloorError) as excinfo:
        apply_defense(SAMPLE, plan, reference, VandalProvider(), mode="provider")
    assert excinfo.value.utility_score < 0.85
    assert isinstance(excinfo.value.outcome, DefenseOutcome)


def test_provider_mode_guided_rewrites_via_stub(stub_provider, small_store, small_corpus, base_config):
    _, held = small_corpus
    article = held[0]
    report = assess(article, base_config, provider=stub_provider, store=small_store)
    plan = build_suggestions(report.reflection, 3)
    outcome = apply_defense(
        article.body, plan, report.ranked_matches[0].reference, stub_provider, mode="provider"
    )
    assert outcome.rewritten_text != article.body
    assert outcome.post_likelihood < outcome.pre_likelihood


def test_rule_based_increases_mean_z(stub_provider, small_store, small_corpus, base_config):
    from stylorisk.stylometry import feature_distance

    _, held = small_corpus
    article = held[2]
    report = assess(article, base_config, provider=stub_provider, store=small_store)
    plan = build_suggestions(report.reflection, 3)
    reference = report.ranked_matches[0].reference
    rewritten = rule_based_rewrite(article.body, plan.target_features)
    z_before = feature_distance(compute_features(article.body, "lexicon"), reference.aggregated).mean_z
    z_after = feature_distance(compute_features(rewritten, "lexicon"), reference.aggregated).mean_z
    assert z_after > z_before


def test_unknown_defense_mode(stub_provider):
    reference = _reference_for(SAMPLE, stub_provider)
    plan = RewritePlan(suggestions=("s",), target_features=("hapax_ratio",))
    with pytest.raises(ValueError):
        apply_defense(SAMPLE, plan, reference, stub_provider, mode="telepathy")
