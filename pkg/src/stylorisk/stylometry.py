"""Stylometric feature extraction and author-level aggregation.

Twelve features per text: four lexical, four syntactic, one readability,
two semantic, one free-text style summary.  The semantic pair and the
summary come from a chat provider or, offline, from the bundled
sentiment lexicon.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, asdict
from functools import lru_cache
from importlib import resources

from .errors import EmptyListError, EmptyTextError, ParseError
from .textcore import (
    TokenKind,
    count_syllables,
    is_stopword,
    split_sentences,
    tag_pos,
    tokenize,
)

# The nine deterministically computable numeric features, in the fixed
# category order (lexical, syntactic, readability).  This order is also
# the tie-break order wherever features are ranked.
NUMERIC_FEATURES = (
    "unique_word_count",
    "avg_word_length",
    "type_token_ratio",
    "hapax_ratio",
    "avg_sentence_length",
    "stopword_count",
    "punctuation_count",
    "pos_variation_count",
    "flesch_score",
)

# Provider/lexicon-derived numeric features; aggregated but excluded from
# z-score distances.
SEMANTIC_FEATURES = ("polarity", "subjectivity")

AGGREGATED_FEATURES = NUMERIC_FEATURES + SEMANTIC_FEATURES

COUNT_FEATURES = frozenset(
    ("unique_word_count", "stopword_count", "punctuation_count", "pos_variation_count")
)

FEATURE_LABELS = {
    "unique_word_count": "unique word count",
    "avg_word_length": "average word length",
    "type_token_ratio": "type-token ratio",
    "hapax_ratio": "hapax legomenon ratio",
    "avg_sentence_length": "average sentence length",
    "stopword_count": "stopword count",
    "punctuation_count": "punctuation count",
    "pos_variation_count": "part-of-speech variation count",
    "flesch_score": "Flesch reading-ease score",
    "polarity": "polarity",
    "subjectivity": "subjectivity",
    "style_summary": "writing style summary",
}

Z_EPSILON = 1e-6
STYLE_SUMMARY_CAP = 400


@dataclass(frozen=True)
class StylometricProfile:
    unique_word_count: int
    avg_word_length: float
    type_token_ratio: float
    hapax_ratio: float
    avg_sentence_length: float
    stopword_count: int
    punctuation_count: int
    pos_variation_count: int
    flesch_score: float
    polarity: float
    subjectivity: float
    style_summary: str

    def numeric(self) -> dict[str, float]:
        d = asdict(self)
        return {name: d[name] for name in AGGREGATED_FEATURES}


@dataclass(frozen=True)
class AggregatedProfile:
    means: dict[str, float]
    stds: dict[str, float]
    sample_count: int
    style_summary: str


@dataclass(frozen=True)
class FeatureDistance:
    z_scores: dict[str, float]
    mean_z: float


@lru_cache(maxsize=1)
def sentiment_lexicon() -> dict[str, tuple[float, bool]]:
    text = resources.files("stylorisk.data").joinpath("sentiment.tsv").read_text("utf-8")
    lexicon = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        word, valence, subjective = line.split("\t")
        lexicon[word] = (float(valence), subjective == "1")
    return lexicon


def _lexicon_semantics(word_lowers):
    matched = [sentiment_lexicon()[w] for w in word_lowers if w in sentiment_lexicon()]
    if not matched:
        return 0.0, 0.0
    polarity = sum(v for v, _ in matched) / len(matched)
    subjectivity = sum(1 for _, s in matched if s) / len(matched)
    return polarity, subjectivity


def _template_summary(avg_sentence_length, type_token_ratio, polarity, subjectivity):
    if polarity > 0.1:
        tone = "positive"
    elif polarity < -0.1:
        tone = "negative"
    else:
        tone = "neutral"
    register = "subjective" if subjectivity >= 0.5 else "objective"
    return (
        f"sentences average {avg_sentence_length:.1f} words; "
        f"vocabulary richness {type_token_ratio:.2f}; "
        f"{tone} tone; {register} register"
    )


def _provider_semantics(text, provider):
    from .prompts import render_prompt

    prompt = render_prompt("semantic", article_text=text)
    reply = provider.chat_text(prompt)
    try:
        payload = _parse_semantic_reply(reply)
    except ParseError:
        retry_prompt = prompt + "\nYour previous reply was not valid JSON. Respond with only the JSON object."
        payload = _parse_semantic_reply(provider.chat_text(retry_prompt))
    polarity = min(1.0, max(-1.0, float(payload["polarity"])))
    subjectivity = min(1.0, max(0.0, float(payload["subjectivity"])))
    return polarity, subjectivity, str(payload.get("style_summary", ""))


def _parse_semantic_reply(reply):
    from .prompts import extract_json

    payload = extract_json(reply)
    if not isinstance(payload, dict) or "polarity" not in payload or "subjectivity" not in payload:
        raise ParseError("semantic reply missing polarity/subjectivity")
    return payload


def compute_features(text: str, semantic_source: str = "lexicon", provider=None) -> StylometricProfile:
    """Compute the full twelve-feature profile for one text.

    semantic_source "lexicon" keeps everything offline and deterministic;
    "provider" queries the configured chat provider for polarity,
    subjectivity and the style summary.
    """
    tagged = tag_pos(tokenize(text))
    words = [t for t in tagged if t.kind is TokenKind.WORD]
    if not words:
        raise EmptyTextError("no word tokens in input text")

    segmented = split_sentences(tagged)
    word_count = len(words)
    sentence_count = len(segmented.sentence_bounds)
    counts = Counter(t.lower for t in words)
    unique = len(counts)
    hapaxes = sum(1 for c in counts.values() if c == 1)
    syllable_total = sum(count_syllables(t.lower) for t in words)

    words_per_sentence = word_count / sentence_count
    syllables_per_word = syllable_total / word_count
    flesch = 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word

    avg_sentence_length = words_per_sentence
    type_token_ratio = unique / word_count

    if semantic_source == "provider":
        if provider is None:
            raise ValueError("semantic_source 'provider' requires a provider")
        polarity, subjectivity, style_summary = _provider_semantics(text, provider)
    elif semantic_source == "lexicon":
        polarity, subjectivity = _lexicon_semantics([t.lower for t in words])
        style_summary = _template_summary(
            avg_sentence_length, type_token_ratio, polarity, subjectivity
        )
    else:
        raise ValueError(f"unknown semantic_source: {semantic_source!r}")

    return StylometricProfile(
        unique_word_count=unique,
        avg_word_length=sum(len(t.surface) for t in words) / word_count,
        type_token_ratio=type_token_ratio,
        hapax_ratio=hapaxes / unique,
        avg_sentence_length=avg_sentence_length,
        stopword_count=sum(1 for t in words if is_stopword(t.lower)),
        punctuation_count=sum(1 for t in tagged if t.kind is TokenKind.PUNCTUATION),
        pos_variation_count=len({t.pos for t in words}),
        flesch_score=flesch,
        polarity=polarity,
        subjectivity=subjectivity,
        style_summary=style_summary,
    )


def aggregate(profiles: list[StylometricProfile]) -> AggregatedProfile:
    """Mean and population standard deviation per numeric feature."""
    if not profiles:
        raise EmptyListError("cannot aggregate zero profiles")
    n = len(profiles)
    means = {}
    stds = {}
    for name in AGGREGATED_FEATURES:
        values = [float(getattr(p, name)) for p in profiles]
        if all(v == values[0] for v in values):
            # exact path: k copies of one value have that mean and zero std
            means[name] = values[0]
            stds[name] = 0.0
            continue
        mean = sum(values) / n
        variance = sum((v - mean) ** 2 for v in values) / n
        means[name] = mean
        stds[name] = math.sqrt(variance)

    seen = []
    for p in profiles:
        if p.style_summary and p.style_summary not in seen:
            seen.append(p.style_summary)
    summary = "; ".join(seen)[:STYLE_SUMMARY_CAP]
    return AggregatedProfile(means=means, stds=stds, sample_count=n, style_summary=summary)


def z_scores(profile: StylometricProfile, means: dict, stds: dict) -> FeatureDistance:
    """Per-feature z-scores of a profile against reference means/stds."""
    scores = {}
    for name in NUMERIC_FEATURES:
        x = float(getattr(profile, name))
        scores[name] = abs(x - means[name]) / max(stds[name], Z_EPSILON)
    return FeatureDistance(z_scores=scores, mean_z=sum(scores.values()) / len(scores))


def feature_distance(article: StylometricProfile, author: AggregatedProfile) -> FeatureDistance:
    """Z-scores of an article against an author's aggregated profile."""
    return z_scores(article, author.means, author.stds)


def format_value(name: str, value) -> str:
    if name in COUNT_FEATURES:
        return str(int(value))
    return f"{value:.4f}"


def describe_features(profile, label: str) -> str:
    """Render a profile as one deterministic line per feature.

    Aggregated references render each numeric feature as "mean ± std";
    plain profiles render the raw value.  The output is embedded verbatim
    in comparison prompts, so the format is part of the wire contract.
    """
    lines = []
    if isinstance(profile, AggregatedProfile):
        for name in AGGREGATED_FEATURES:
            lines.append(
                f"{label}: {FEATURE_LABELS[name]} = "
                f"{profile.means[name]:.4f} ± {profile.stds[name]:.4f}"
            )
        lines.append(f"{label}: {FEATURE_LABELS['style_summary']} = {profile.style_summary}")
    else:
        for name in AGGREGATED_FEATURES:
            lines.append(
                f"{label}: {FEATURE_LABELS[name]} = {format_value(name, getattr(profile, name))}"
            )
        lines.append(f"{label}: {FEATURE_LABELS['style_summary']} = {profile.style_summary}")
    return "\n".join(lines)


def profile_to_dict(profile: StylometricProfile) -> dict:
    return asdict(profile)


def profile_from_dict(data: dict) -> StylometricProfile:
    return StylometricProfile(**data)


def aggregated_to_dict(agg: AggregatedProfile) -> dict:
    return {
        "means": dict(agg.means),
        "stds": dict(agg.stds),
        "sample_count": agg.sample_count,
        "style_summary": agg.style_summary,
    }


def aggregated_from_dict(data: dict) -> AggregatedProfile:
    return AggregatedProfile(
        means=dict(data["means"]),
        stds=dict(data["stds"]),
        sample_count=int(data["sample_count"]),
        style_summary=data.get("style_summary", ""),
    )
