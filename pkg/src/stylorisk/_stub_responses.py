"""Prompt-aware reply shim for the stub provider.

Instead of canned text, stub chat recognizes the toolkit's own prompt
shapes and answers them deterministically:

- feature-comparison prompts are scored from the feature values embedded
  in the prompt itself: likelihood = exp(-mean z-score), where a plain
  reference value gets a surrogate std of 20% of its magnitude;
- qualitative-comparison prompts reuse the same scoring but blend in a
  hash-derived noise term (weight 0.7) that mimics the unreliability of
  purely qualitative judgments: likelihood = 0.3*exp(-mean z) + 0.7*u;
- extraction, candidate-proposal, rewrite and tone prompts are answered
  by the corresponding offline heuristics.

All replies are pure functions of the prompt string.
"""

from __future__ import annotations

import json
import math
import re
from functools import lru_cache

from .stylometry import FEATURE_LABELS, NUMERIC_FEATURES, Z_EPSILON

_VALUE_RE = re.compile(
    r"^(-?\d+(?:\.\d+)?)(?:\s*±\s*(-?\d+(?:\.\d+)?))?\s*$"
)

_SALA_MARKER = "comparing the writing style of two texts using computed stylometric measurements"
_LDA_MARKER = "Compare the writing style of the two texts below qualitatively"
_METADATA_MARKER = "Extract the main topic category"
_CANDIDATES_MARKER = "investigating which journalists may have written"
_RECOMPOSE_MARKER = "Rewrite this article, follow these suggestions closely."
_PARAPHRASE_MARKER = "Paraphrase this article."
_SEMANTIC_MARKER = "Analyze the overall tone of the text below."
_REFLECTION_MARKER = "explain which stylistic habits most expose the author"


def respond(prompt: str) -> str:
    if _SALA_MARKER in prompt:
        return _sala_reply(prompt)
    if _LDA_MARKER in prompt:
        return _lda_reply(prompt)
    if _METADATA_MARKER in prompt:
        return _metadata_reply(prompt)
    if _CANDIDATES_MARKER in prompt:
        return _candidates_reply(prompt)
    if _RECOMPOSE_MARKER in prompt:
        return _recompose_reply(prompt)
    if _PARAPHRASE_MARKER in prompt:
        return _paraphrase_reply(prompt)
    if _SEMANTIC_MARKER in prompt:
        return _semantic_reply(prompt)
    if _REFLECTION_MARKER in prompt:
        return (
            "The ranked measurements point to habitual sentence construction and "
            "vocabulary choices that closely track the matched author's usual values."
        )
    return _generic_reply(prompt)


def _generic_reply(prompt: str) -> str:
    from .provider import stable_hash

    return f"stub:{stable_hash(prompt):016x}"


def _block_after(prompt: str, header: str) -> str:
    start = prompt.index(header) + len(header)
    rest = prompt[start:].lstrip("\n")
    end = rest.find("\n\n")
    return rest if end == -1 else rest[:end]


def _between(prompt: str, start_marker: str, end_marker: str) -> str:
    start = prompt.index(start_marker) + len(start_marker)
    end = prompt.index(end_marker, start)
    return prompt[start:end].strip("\n")


def _parse_feature_block(block: str) -> dict[str, tuple[float, float | None]]:
    """Parse 'label: feature = value' lines; value may be 'mean ± std'."""
    parsed = {}
    labels = {label: name for name, label in FEATURE_LABELS.items()}
    for line in block.splitlines():
        if " = " not in line:
            continue
        left, _, value_part = line.partition(" = ")
        feature = None
        for label, name in labels.items():
            if left.endswith(label):
                feature = name
                break
        if feature is None or feature == "style_summary":
            continue
        m = _VALUE_RE.match(value_part.strip())
        if not m:
            continue
        mean = float(m.group(1))
        std = float(m.group(2)) if m.group(2) is not None else None
        parsed[feature] = (mean, std)
    return parsed


def _z_from_blocks(article: dict, reference: dict) -> dict[str, float]:
    scores = {}
    for name in NUMERIC_FEATURES:
        if name not in article or name not in reference:
            continue
        x = article[name][0]
        mean, std = reference[name]
        if std is None:
            std = 0.2 * abs(mean)
        scores[name] = abs(x - mean) / max(std, Z_EPSILON)
    return scores


def _verdict(likelihood: float) -> str:
    return "same" if likelihood >= 0.5 else "different"


def _sala_reply(prompt: str) -> str:
    article = _parse_feature_block(_block_after(prompt, "Article A features:"))
    reference = _parse_feature_block(_block_after(prompt, "Article B features:"))
    scores = _z_from_blocks(article, reference)
    if not scores:
        return json.dumps({"likelihood": 0.0, "verdict": "uncertain", "key_features": []})
    mean_z = sum(scores.values()) / len(scores)
    likelihood = math.exp(-mean_z)
    order = {name: i for i, name in enumerate(NUMERIC_FEATURES)}
    closest = sorted(scores, key=lambda n: (scores[n], order[n]))[:3]
    return json.dumps(
        {
            "likelihood": round(likelihood, 6),
            "verdict": _verdict(likelihood),
            "key_features": [FEATURE_LABELS[name] for name in closest],
        }
    )


@lru_cache(maxsize=4096)
def _cached_profile(text: str):
    from .stylometry import compute_features

    return compute_features(text, "lexicon")


def _lda_reply(prompt: str) -> str:
    from .errors import EmptyTextError
    from .provider import stable_hash
    from .stylometry import z_scores

    text_a = _between(prompt, "--- TEXT A ---", "--- END TEXT A ---")
    text_b = _between(prompt, "--- TEXT B ---", "--- END TEXT B ---")
    try:
        profile_a = _cached_profile(text_a)
        profile_b = _cached_profile(text_b)
    except EmptyTextError:
        return json.dumps({"likelihood": 0.0, "verdict": "uncertain", "key_features": []})
    means = {name: float(getattr(profile_b, name)) for name in NUMERIC_FEATURES}
    stds = {name: 0.2 * abs(means[name]) for name in NUMERIC_FEATURES}
    base = math.exp(-z_scores(profile_a, means, stds).mean_z)
    noise = stable_hash(text_a + "\x1f" + text_b) / 2**64
    likelihood = min(1.0, max(0.0, 0.3 * base + 0.7 * noise))
    return json.dumps(
        {
            "likelihood": round(likelihood, 6),
            "verdict": _verdict(likelihood),
            "key_features": ["overall phrasing", "sentence construction"],
        }
    )


def _metadata_reply(prompt: str) -> str:
    from .pipeline import heuristic_metadata

    text = _between(prompt, "--- ARTICLE ---", "--- END ARTICLE ---")
    meta = heuristic_metadata(text)
    return json.dumps(
        {
            "topic_category": meta.topic_category,
            "publication_date": meta.publication_date,
            "publisher_origins": list(meta.publisher_origins),
            "geo_location": meta.geo_location,
        }
    )


def _candidates_reply(prompt: str) -> str:
    limit_match = re.search(r"Propose up to (\d+) likely authors", prompt)
    limit = int(limit_match.group(1)) if limit_match else 20
    names = []
    for line in prompt.splitlines():
        m = re.search(r"\bauthor: (.+?)\s*$", line)
        if m and m.group(1) not in names:
            names.append(m.group(1))
    return json.dumps(names[:limit])


def _recompose_reply(prompt: str) -> str:
    from .defense import directive_table, rule_based_rewrite

    text = _between(prompt, "--- ARTICLE ---", "--- END ARTICLE ---")
    suggestions_block = _block_after(prompt, "Suggestions:")
    directive_to_feature = {v: k for k, v in directive_table().items()}
    targets = []
    for line in suggestions_block.splitlines():
        directive = re.sub(r"^\s*\d+\.\s*", "", line).strip()
        feature = directive_to_feature.get(directive)
        if feature and feature not in targets:
            targets.append(feature)
    return rule_based_rewrite(text, tuple(targets))


def _paraphrase_reply(prompt: str) -> str:
    from .defense import simple_paraphrase

    text = _between(prompt, "--- ARTICLE ---", "--- END ARTICLE ---")
    return simple_paraphrase(text)


def _semantic_reply(prompt: str) -> str:
    from .errors import EmptyTextError
    from .stylometry import compute_features

    text = _between(prompt, "--- TEXT ---", "--- END TEXT ---")
    try:
        profile = compute_features(text, "lexicon")
    except EmptyTextError:
        return json.dumps({"polarity": 0.0, "subjectivity": 0.0, "style_summary": ""})
    return json.dumps(
        {
            "polarity": profile.polarity,
            "subjectivity": profile.subjectivity,
            "style_summary": profile.style_summary,
        }
    )
