"""Candidate matching strategies: embedding similarity (es), qualitative
LLM comparison (lda), and feature-grounded LLM comparison (sala).

Every strategy emits a MatchResult with a likelihood in [0, 1]; the
verdict is derived from the likelihood against the decision threshold so
the two can never disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyListError, ParseError
from .prompts import extract_json, render_prompt
from .provider import ChatRequest, Embedding, cosine
from .stylometry import (
    AggregatedProfile,
    FeatureDistance,
    NUMERIC_FEATURES,
    StylometricProfile,
    describe_features,
    z_scores,
)

STRATEGIES = ("es", "lda", "sala")

VERDICT_SAME = "same"
VERDICT_DIFFERENT = "different"
VERDICT_UNCERTAIN = "uncertain"

DEFAULT_THRESHOLD = 0.5

# Surrogate spread used when the reference is a single profile with no
# variance information: 20% of the reference value.
PLAIN_STD_FRACTION = 0.2


@dataclass(frozen=True)
class RefSample:
    text: str
    profile: StylometricProfile
    embedding: Embedding


@dataclass(frozen=True)
class MatchReference:
    """Everything known about one candidate at match time.

    Database-backed candidates carry an aggregated profile and a
    centroid; zero-shot candidates carry fetched samples instead.
    """

    name: str
    aggregated: AggregatedProfile | None = None
    centroid: Embedding | None = None
    samples: tuple[RefSample, ...] = ()


@dataclass
class MatchResult:
    author_name: str
    likelihood: float
    verdict: str
    evidence: dict
    comparisons_made: int
    reference: MatchReference | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "author_name": self.author_name,
            "likelihood": self.likelihood,
            "verdict": self.verdict,
            "evidence": self.evidence,
            "comparisons_made": self.comparisons_made,
        }


@dataclass(frozen=True)
class ArticleContext:
    """Precomputed views of the article being matched."""

    text: str
    profile: StylometricProfile
    embedding: Embedding


def derive_verdict(likelihood: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    return VERDICT_SAME if likelihood >= threshold else VERDICT_DIFFERENT


def parse_match_reply(reply: str) -> tuple[float, str | None, list[str]]:
    """Strict parse of a comparison reply.

    The documented schema is {"likelihood": number, "verdict": ...,
    "key_features": [...]}; extra keys are ignored, a missing or
    non-numeric likelihood is a ParseError.  Likelihood is clamped into
    [0, 1].
    """
    payload = extract_json(reply)
    if not isinstance(payload, dict) or "likelihood" not in payload:
        raise ParseError("reply missing 'likelihood'")
    raw = payload["likelihood"]
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ParseError(f"likelihood is not a number: {raw!r}")
    likelihood = min(1.0, max(0.0, float(raw)))
    verdict = payload.get("verdict")
    if verdict not in (VERDICT_SAME, VERDICT_DIFFERENT, VERDICT_UNCERTAIN):
        verdict = None
    key_features = payload.get("key_features")
    if not isinstance(key_features, list):
        key_features = []
    return likelihood, verdict, [str(k) for k in key_features]


def _chat_with_retry(provider, prompt: str) -> tuple[float, str | None, list[str]]:
    reply = provider.chat(ChatRequest.single(prompt))
    try:
        return parse_match_reply(reply)
    except ParseError:
        retry = prompt + "\nYour previous reply was not valid JSON. Respond with only the JSON object."
        return parse_match_reply(provider.chat(ChatRequest.single(retry)))


def match_es(
    article_embedding: Embedding,
    reference_embedding: Embedding,
    author_name: str = "",
    threshold: float = DEFAULT_THRESHOLD,
) -> MatchResult:
    """Embedding-similarity match: likelihood = (cosine + 1) / 2."""
    c = cosine(article_embedding, reference_embedding)
    likelihood = (c + 1.0) / 2.0
    return MatchResult(
        author_name=author_name,
        likelihood=likelihood,
        verdict=derive_verdict(likelihood, threshold),
        evidence={"cosine": c},
        comparisons_made=1,
    )


def build_sala_prompt(article_desc: str, reference_desc: str) -> str:
    """Deterministic feature-comparison prompt from two description blocks."""
    return render_prompt("sala", article_block=article_desc, reference_block=reference_desc)


def reference_spread(reference) -> tuple[dict, dict]:
    """Means/stds for z-scoring against an aggregated or plain reference."""
    if isinstance(reference, AggregatedProfile):
        return reference.means, reference.stds
    means = {name: float(getattr(reference, name)) for name in NUMERIC_FEATURES}
    stds = {name: PLAIN_STD_FRACTION * abs(means[name]) for name in NUMERIC_FEATURES}
    return means, stds


def match_sala(
    article_profile: StylometricProfile,
    reference,
    provider,
    author_name: str = "",
    threshold: float = DEFAULT_THRESHOLD,
) -> MatchResult:
    """Feature-grounded comparison via the chat provider.

    The prompt embeds both feature blocks; the deterministic z-scores are
    always attached as evidence regardless of what the provider answers.
    """
    means, stds = reference_spread(reference)
    distance = z_scores(article_profile, means, stds)
    prompt = build_sala_prompt(
        describe_features(article_profile, "Article A"),
        describe_features(reference, "Article B"),
    )
    evidence = {"z_scores": distance.z_scores, "mean_z": distance.mean_z}
    try:
        likelihood, provider_verdict, key_features = _chat_with_retry(provider, prompt)
    except ParseError as exc:
        evidence.update({"parse_failures": 1, "error": str(exc)})
        return MatchResult(author_name, 0.0, VERDICT_UNCERTAIN, evidence, 1)
    evidence.update({"key_features": key_features, "provider_verdict": provider_verdict})
    return MatchResult(
        author_name=author_name,
        likelihood=likelihood,
        verdict=derive_verdict(likelihood, threshold),
        evidence=evidence,
        comparisons_made=1,
    )


def match_lda(
    article_text: str,
    reference_texts,
    provider,
    author_name: str = "",
    threshold: float = DEFAULT_THRESHOLD,
) -> MatchResult:
    """Qualitative style comparison against each reference text.

    Per-reference likelihoods are averaged; a comparison whose reply
    cannot be parsed (after one reformat retry) scores 0 and is counted
    in the failure tally.
    """
    reference_texts = list(reference_texts)
    if not reference_texts:
        raise EmptyListError("lda needs at least one reference text")
    per_reference = []
    failures = 0
    total = 0.0
    for ref_text in reference_texts:
        prompt = render_prompt("lda", article_text=article_text, reference_text=ref_text)
        try:
            likelihood, provider_verdict, key_features = _chat_with_retry(provider, prompt)
            per_reference.append(
                {"likelihood": likelihood, "verdict": provider_verdict, "key_features": key_features}
            )
            total += likelihood
        except ParseError as exc:
            failures += 1
            per_reference.append({"likelihood": 0.0, "error": str(exc)})
    likelihood = total / len(reference_texts)
    evidence = {"per_reference": per_reference, "parse_failures": failures}
    if failures == len(reference_texts):
        return MatchResult(author_name, 0.0, VERDICT_UNCERTAIN, evidence, len(reference_texts))
    return MatchResult(
        author_name=author_name,
        likelihood=likelihood,
        verdict=derive_verdict(likelihood, threshold),
        evidence=evidence,
        comparisons_made=len(reference_texts),
    )


def match_candidate(
    article: ArticleContext,
    reference: MatchReference,
    strategy: str,
    provider,
    threshold: float = DEFAULT_THRESHOLD,
) -> MatchResult:
    """Match one candidate with the given strategy.

    Database-backed references (aggregated profile + centroid) cost one
    comparison; sample-backed references cost one comparison per sample,
    averaged arithmetically.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy!r}")

    if strategy == "es":
        if reference.centroid is not None:
            result = match_es(article.embedding, reference.centroid, reference.name, threshold)
        else:
            result = _mean_over_samples(
                reference,
                [
                    match_es(article.embedding, s.embedding, reference.name, threshold)
                    for s in _require_samples(reference)
                ],
                threshold,
            )
    elif strategy == "sala":
        if reference.aggregated is not None:
            result = match_sala(article.profile, reference.aggregated, provider, reference.name, threshold)
        else:
            result = _mean_over_samples(
                reference,
                [
                    match_sala(article.profile, s.profile, provider, reference.name, threshold)
                    for s in _require_samples(reference)
                ],
                threshold,
            )
    else:
        texts = [s.text for s in _require_samples(reference)]
        result = match_lda(article.text, texts, provider, reference.name, threshold)

    result.reference = reference
    return result


def _require_samples(reference: MatchReference):
    if not reference.samples:
        raise EmptyListError(f"candidate {reference.name!r} has no reference samples")
    return reference.samples


def _mean_over_samples(reference, results, threshold) -> MatchResult:
    likelihood = sum(r.likelihood for r in results) / len(results)
    failures = sum(r.evidence.get("parse_failures", 0) for r in results)
    evidence = {
        "per_sample": [r.evidence for r in results],
        "parse_failures": failures,
    }
    comparisons = sum(r.comparisons_made for r in results)
    if failures == len(results):
        return MatchResult(reference.name, 0.0, VERDICT_UNCERTAIN, evidence, comparisons)
    return MatchResult(
        author_name=reference.name,
        likelihood=likelihood,
        verdict=derive_verdict(likelihood, threshold),
        evidence=evidence,
        comparisons_made=comparisons,
    )


def distance_to_reference(article_profile: StylometricProfile, reference) -> FeatureDistance:
    """Z-scores of the article against any reference form."""
    means, stds = reference_spread(reference)
    return z_scores(article_profile, means, stds)
