"""Feature extraction against hand-worked values and an independent
brute-force oracle; aggregation and distance math."""

import math
import random
import re
from collections import Counter
from importlib import resources

import pytest

from stylorisk.errors import EmptyListError, EmptyTextError
from stylorisk.stylometry import (
    AggregatedProfile,
    NUMERIC_FEATURES,
    StylometricProfile,
    aggregate,
    compute_features,
    describe_features,
    feature_distance,
    format_value,
)

# -- independent oracle ----------------------------------------------------

_WORD_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*", re.UNICODE)
_ABSORBED_RE = re.compile(r"(?<=[^\W\d_])['’](?=[^\W\d_])", re.UNICODE)

_SUFFIX_TABLE = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ize", "VERB"),
    ("ise", "VERB"),
    ("ify", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("less", "ADJ"),
)


def _data_lines(name):
    text = resources.files("stylorisk.data").joinpath(name).read_text("utf-8")
    return [line for line in text.splitlines() if line.strip()]


def _oracle_stopwords():
    return set(_data_lines("stopwords.txt"))


def _oracle_lexicon():
    return dict(line.split("\t") for line in _data_lines("pos_lexicon.tsv"))


def _oracle_syllables(word):
    groups = len(re.findall(r"[aeiouy]+", word))
    if len(word) > 2 and word.endswith("e") and not word.endswith("le"):
        groups -= 1
    return max(groups, 1)


def _oracle_tag(word, lexicon):
    if word in lexicon:
        return lexicon[word]
    for suffix, tag in _SUFFIX_TABLE:
        if word.endswith(suffix) and len(word) >= len(suffix) + 2:
            return tag
    return "NOUN"


def _oracle_features(text, n_sentences):
    stop = _oracle_stopwords()
    lexicon = _oracle_lexicon()
    surfaces = _WORD_RE.findall(text)
    lowers = [w.lower() for w in surfaces]
    counts = Counter(lowers)
    word_count = len(lowers)
    unique = len(counts)
    absorbed = len(_ABSORBED_RE.findall(text))
    punct = (
        sum(1 for ch in text if not ch.isspace() and not ch.isalpha() and not ch.isdigit())
        - absorbed
    )
    syllables = sum(_oracle_syllables(w) for w in lowers)
    return {
        "unique_word_count": unique,
        "avg_word_length": sum(len(w) for w in surfaces) / word_count,
        "type_token_ratio": unique / word_count,
        "hapax_ratio": sum(1 for v in counts.values() if v == 1) / unique,
        "avg_sentence_length": word_count / n_sentences,
        "stopword_count": sum(1 for w in lowers if w in stop),
        "punctuation_count": punct,
        "pos_variation_count": len({_oracle_tag(w, lexicon) for w in lowers}),
        "flesch_score": 206.835
        - 1.015 * (word_count / n_sentences)
        - 84.6 * (syllables / word_count),
    }


_VOCAB = (
    "cat dogs running quickly the a an beautiful rate don't zorblax data "
    "house apple strange remarkable garden window tree said joyful "
    "analysis results while under rhythm coyote unique"
).split()
_ABBREV_MID = ("Dr.", "Mr.", "etc.")


def _random_text(rng):
    """Random small text (5..~200 words) with its known sentence count."""
    n_sentences = rng.randint(1, 8)
    chunks = []
    for _ in range(n_sentences):
        n_words = rng.randint(5, 14)
        words = [rng.choice(_VOCAB) for _ in range(n_words)]
        if rng.random() < 0.3:
            words.insert(rng.randrange(len(words)), rng.choice(_ABBREV_MID))
        if rng.random() < 0.3:
            words.insert(rng.randrange(len(words)), str(rng.randint(0, 9999)))
        if len(words) > 3 and rng.random() < 0.5:
            words[rng.randrange(1, len(words) - 1)] += ","
        sentence = " ".join(words) + rng.choice(".!?")
        chunks.append(sentence[0].upper() + sentence[1:])
    trailing = rng.random() < 0.25
    text = " ".join(chunks)
    if trailing:
        text += " " + " ".join(rng.choice(_VOCAB) for _ in range(rng.randint(1, 4)))
        n_sentences += 1
    return text, n_sentences


def test_feature_oracle_equivalence_200_random_texts():
    rng = random.Random(20240817)
    for _ in range(200):
        text, n_sentences = _random_text(rng)
        profile = compute_features(text, "lexicon")
        expected = _oracle_features(text, n_sentences)
        for name in NUMERIC_FEATURES:
            assert getattr(profile, name) == pytest.approx(expected[name], abs=1e-9), (
                name,
                text,
            )


# -- worked example --------------------------------------------------------


def test_worked_example_all_nine_features():
    p = compute_features("The cat sat. The cat ran.", "lexicon")
    assert p.unique_word_count == 4
    assert p.avg_word_length == pytest.approx(3.0)
    assert p.type_token_ratio == pytest.approx(0.6667, abs=1e-4)
    assert p.hapax_ratio == pytest.approx(0.5)
    assert p.avg_sentence_length == pytest.approx(3.0)
    assert p.stopword_count == 2
    assert p.punctuation_count == 2
    assert p.pos_variation_count == 3
    assert p.flesch_score == pytest.approx(119.19, abs=1e-6)


def test_single_word_degenerate():
    p = compute_features("cat", "lexicon")
    assert p.unique_word_count == 1
    assert p.type_token_ratio == pytest.approx(1.0)
    assert p.hapax_ratio == pytest.approx(1.0)


def test_empty_text_error():
    with pytest.raises(EmptyTextError):
        compute_features("", "lexicon")
    with pytest.raises(EmptyTextError):
        compute_features("?! ... 42", "lexicon")


def test_flesch_formula_exact_construction():
    # 2 sentences of 4 one-syllable words -> w=4, s=1
    p = compute_features("Tup mig bok nal. Dap rit mon kel.", "lexicon")
    assert p.flesch_score == pytest.approx(206.835 - 1.015 * 4 - 84.6 * 1.0, abs=1e-6)


def test_lexicon_polarity_subjectivity():
    p = compute_features("The results were beautiful and remarkable.", "lexicon")
    assert -1.0 <= p.polarity <= 1.0
    assert 0.0 <= p.subjectivity <= 1.0
    assert p.polarity > 0
    neutral = compute_features("Tup mig bok nal.", "lexicon")
    assert neutral.polarity == 0.0
    assert neutral.subjectivity == 0.0


def test_style_summary_deterministic():
    a = compute_features("The cat sat on the mat.", "lexicon")
    b = compute_features("The cat sat on the mat.", "lexicon")
    assert a.style_summary == b.style_summary
    assert a.style_summary


# -- aggregate ---------------------------------------------------------------


def _profile_with(**overrides):
    base = dict(
        unique_word_count=10,
        avg_word_length=4.0,
        type_token_ratio=0.5,
        hapax_ratio=0.4,
        avg_sentence_length=8.0,
        stopword_count=5,
        punctuation_count=3,
        pos_variation_count=4,
        flesch_score=70.0,
        polarity=0.0,
        subjectivity=0.2,
        style_summary="plain",
    )
    base.update(overrides)
    return StylometricProfile(**base)


def test_aggregate_mean_and_population_std():
    agg = aggregate([_profile_with(type_token_ratio=0.4), _profile_with(type_token_ratio=0.6)])
    assert agg.means["type_token_ratio"] == pytest.approx(0.5)
    assert agg.stds["type_token_ratio"] == pytest.approx(0.1)
    assert agg.sample_count == 2


def test_aggregate_single_profile_std_zero():
    p = _profile_with()
    agg = aggregate([p])
    for name in NUMERIC_FEATURES:
        assert agg.means[name] == pytest.approx(float(getattr(p, name)))
        assert agg.stds[name] == 0.0
    assert agg.sample_count == 1


def test_aggregate_identical_profiles_zero_std():
    agg = aggregate([_profile_with()] * 7)
    assert all(std == 0.0 for std in agg.stds.values())


def test_aggregate_empty_list_error():
    with pytest.raises(EmptyListError):
        aggregate([])


def test_incremental_equals_batch_on_random_profiles():
    rng = random.Random(7)
    for _ in range(50):
        profiles = [
            _profile_with(
                unique_word_count=rng.randint(5, 300),
                avg_word_length=rng.uniform(3, 8),
                type_token_ratio=rng.uniform(0.1, 1.0),
                flesch_score=rng.uniform(-20, 120),
            )
            for _ in range(rng.randint(1, 12))
        ]
        batch = aggregate(profiles)
        incremental = None
        for i in range(len(profiles)):
            incremental = aggregate(profiles[: i + 1])
        for name in NUMERIC_FEATURES:
            assert incremental.means[name] == pytest.approx(batch.means[name], abs=1e-9)
            assert incremental.stds[name] == pytest.approx(batch.stds[name], abs=1e-9)


# -- feature_distance --------------------------------------------------------


def test_distance_identity_is_zero():
    p = _profile_with()
    dist = feature_distance(p, aggregate([p]))
    assert dist.mean_z == 0.0
    assert all(z == 0.0 for z in dist.z_scores.values())


def test_distance_direct_formula():
    agg = aggregate([_profile_with(type_token_ratio=0.4), _profile_with(type_token_ratio=0.6)])
    article = _profile_with(type_token_ratio=0.6)
    dist = feature_distance(article, agg)
    assert dist.z_scores["type_token_ratio"] == pytest.approx(1.0)


def test_distance_zero_std_zero_numerator():
    agg = aggregate([_profile_with(type_token_ratio=0.5)])
    article = _profile_with(type_token_ratio=0.5)
    dist = feature_distance(article, agg)
    assert dist.z_scores["type_token_ratio"] == 0.0


def test_distance_mean_over_nine_features():
    agg = aggregate([_profile_with(type_token_ratio=0.4), _profile_with(type_token_ratio=0.6)])
    article = _profile_with(type_token_ratio=0.6)
    dist = feature_distance(article, agg)
    assert dist.mean_z == pytest.approx(sum(dist.z_scores.values()) / 9)
    assert set(dist.z_scores) == set(NUMERIC_FEATURES)


# -- describe_features -------------------------------------------------------


def test_describe_contains_plain_values():
    p = _profile_with(unique_word_count=4)
    text = describe_features(p, "Article A")
    assert "unique word count = 4" in text
    assert "type-token ratio = 0.5000" in text
    assert text.count("Article A:") == 12


def test_describe_deterministic_and_label_only_difference():
    p = _profile_with()
    once = describe_features(p, "L1")
    twice = describe_features(p, "L1")
    assert once == twice
    other = describe_features(p, "L2")
    assert once != other
    assert once.replace("L1:", "L2:") == other


def test_describe_aggregated_mean_pm_std():
    agg = aggregate([_profile_with(type_token_ratio=0.4), _profile_with(type_token_ratio=0.6)])
    text = describe_features(agg, "Article B")
    assert "type-token ratio = 0.5000 ± 0.1000" in text


def test_format_value_counts_render_integer():
    assert format_value("unique_word_count", 12) == "12"
    assert format_value("flesch_score", 70.0) == "70.0000"
