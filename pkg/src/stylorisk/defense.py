"""Anonymization enhancement: reflection-driven rewrite suggestions, the
guided-recompose prompt, rule-based rewriting, and the utility check.

The rule-based rewriter exists so the defense remains usable and
testable without any text-generation provider; its perturbations push
the targeted features away from the matched author's habitual values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import EmptyTextError, UtilityBelowFloorError
from .matching import ArticleContext, MatchReference, match_candidate
from .prompts import render_prompt
from .provider import ChatRequest, cosine
from .stylometry import compute_features
from .textcore import Token, TokenKind, is_stopword, split_sentences, tokenize

DEFAULT_UTILITY_FLOOR = 0.85

_LEXICAL_TARGETS = frozenset(
    ("unique_word_count", "type_token_ratio", "hapax_ratio", "avg_word_length")
)
_SENTENCE_TARGETS = frozenset(("avg_sentence_length", "flesch_score"))
_STOPWORD_TARGETS = frozenset(("stopword_count", "pos_variation_count"))
_PUNCT_TARGETS = frozenset(("punctuation_count",))


@dataclass(frozen=True)
class ReflectionEntry:
    feature_name: str
    z_score: float
    article_value: float
    author_mean: float
    author_std: float
    explanation: str


@dataclass(frozen=True)
class ReflectionReport:
    identifying_features: tuple[ReflectionEntry, ...]
    matched_author: str
    rationale: str | None = None

    def __post_init__(self):
        if not self.identifying_features:
            raise ValueError("reflection report needs at least one feature")

    def to_dict(self) -> dict:
        return {
            "identifying_features": [
                {
                    "feature_name": e.feature_name,
                    "z_score": e.z_score,
                    "article_value": e.article_value,
                    "author_mean": e.author_mean,
                    "author_std": e.author_std,
                    "explanation": e.explanation,
                }
                for e in self.identifying_features
            ],
            "matched_author": self.matched_author,
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class RewritePlan:
    suggestions: tuple[str, ...]
    target_features: tuple[str, ...]
    utility_floor: float = DEFAULT_UTILITY_FLOOR

    def __post_init__(self):
        if not self.suggestions:
            raise ValueError("rewrite plan needs at least one suggestion")
        if not 0.0 <= self.utility_floor <= 1.0:
            raise ValueError("utility floor must be in [0, 1]")


@dataclass
class DefenseOutcome:
    rewritten_text: str
    utility_score: float
    pre_likelihood: float
    post_likelihood: float
    suggestions_used: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "rewritten_text": self.rewritten_text,
            "utility_score": self.utility_score,
            "pre_likelihood": self.pre_likelihood,
            "post_likelihood": self.post_likelihood,
            "suggestions_used": list(self.suggestions_used),
        }


@lru_cache(maxsize=1)
def directive_table() -> dict[str, str]:
    text = resources.files("stylorisk.data").joinpath("directives.tsv").read_text("utf-8")
    table = {}
    for line in text.splitlines():
        if line.strip():
            feature, directive = line.split("\t")
            table[feature] = directive
    return table


@lru_cache(maxsize=1)
def thesaurus() -> dict[str, tuple[str, ...]]:
    text = resources.files("stylorisk.data").joinpath("thesaurus.tsv").read_text("utf-8")
    entries = {}
    for line in text.splitlines():
        if line.strip():
            word, synonyms = line.split("\t")
            entries[word] = tuple(synonyms.split(","))
    return entries


def build_suggestions(report: ReflectionReport, k: int, utility_floor: float = DEFAULT_UTILITY_FLOOR) -> RewritePlan:
    """Map the top-k identifying features to rewrite directives."""
    if k < 1:
        raise ValueError("k must be >= 1")
    table = directive_table()
    top = report.identifying_features[:k]
    return RewritePlan(
        suggestions=tuple(table[e.feature_name] for e in top),
        target_features=tuple(e.feature_name for e in top),
        utility_floor=utility_floor,
    )


def build_recompose_prompt(article_text: str, plan: RewritePlan) -> str:
    """Guided-recompose prompt: instruction, numbered suggestions, the
    article, and the factual-content constraint."""
    suggestions_block = "\n".join(f"{i + 1}. {s}" for i, s in enumerate(plan.suggestions))
    return render_prompt(
        "recompose", suggestions_block=suggestions_block, article_text=article_text
    )


# -- rule-based rewriting ----------------------------------------------


def _word_token(word: str, like: Token | None = None) -> Token:
    surface = word
    if like is not None and like.surface[:1].isupper():
        surface = word.capitalize()
    return Token(surface, surface.lower(), TokenKind.WORD, "X")


def _punct_token(mark: str) -> Token:
    return Token(mark, mark, TokenKind.PUNCTUATION, "PUNCT")


def _surfaces(tokens) -> list[str]:
    return [t.surface for t in tokens]


def _detokenize(tokens) -> str:
    parts = []
    for i, tok in enumerate(tokens):
        if i > 0 and tok.kind is not TokenKind.PUNCTUATION:
            parts.append(" ")
        parts.append(tok.surface)
    return "".join(parts)


def _swap_hapaxes(tokens) -> list[Token]:
    """Replace distinctive once-used words with a synonym or the text's
    most frequent content word; capped at 10% of the word count."""
    from collections import Counter

    words = [t for t in tokens if t.kind is TokenKind.WORD]
    counts = Counter(t.lower for t in words)
    cap = max(1, len(words) // 10)
    repeated = sorted(
        (w for w, c in counts.items() if c >= 2 and not is_stopword(w)),
        key=lambda w: (-counts[w], w),
    )
    common = repeated[0] if repeated else None
    entries = thesaurus()
    out = []
    replaced = 0
    for tok in tokens:
        if (
            replaced < cap
            and tok.kind is TokenKind.WORD
            and counts[tok.lower] == 1
            and not is_stopword(tok.lower)
            and len(tok.lower) >= 3
        ):
            synonyms = entries.get(tok.lower)
            replacement = synonyms[0] if synonyms else common
            if replacement and replacement != tok.lower:
                out.append(_word_token(replacement, like=tok))
                replaced += 1
                continue
        out.append(tok)
    return out


def _restructure_sentences(tokens) -> list[Token]:
    """Move the average sentence length away from its current value:
    split long sentences at their midpoint, or merge short ones."""
    segmented = split_sentences(list(tokens))
    sentences = segmented.sentences()
    if not sentences:
        return list(tokens)
    word_counts = [sum(1 for t in s if t.kind is TokenKind.WORD) for s in sentences]
    total_words = sum(word_counts)
    if total_words == 0:
        return list(tokens)
    avg = total_words / len(sentences)

    out: list[Token] = []
    if avg >= 6:
        threshold = max(4, round(0.7 * avg))
        for sentence in sentences:
            words_seen = 0
            n_words = sum(1 for t in sentence if t.kind is TokenKind.WORD)
            split_after = n_words // 2 if n_words > threshold else None
            just_split = False
            for tok in sentence:
                if just_split and tok.kind is TokenKind.WORD:
                    tok = Token(tok.lower.capitalize(), tok.lower, TokenKind.WORD, tok.pos)
                    just_split = False
                out.append(tok)
                if tok.kind is TokenKind.WORD:
                    words_seen += 1
                    if split_after is not None and words_seen == split_after:
                        out.append(_punct_token("."))
                        split_after = None
                        just_split = True
        return out

    for i, sentence in enumerate(sentences):
        sentence = list(sentence)
        merge_with_next = i % 2 == 0 and i + 1 < len(sentences)
        if merge_with_next and sentence and sentence[-1].surface in (".", "!", "?"):
            sentence[-1] = _punct_token(",")
        out.extend(sentence)
    return out


def _insert_stopwords(tokens) -> list[Token]:
    """Insert the filler 'also' after the first word of every other
    sentence, shifting function-word density."""
    segmented = split_sentences(list(tokens))
    out: list[Token] = []
    for i, sentence in enumerate(segmented.sentences()):
        inserted = i % 2 != 0
        for tok in sentence:
            out.append(tok)
            if not inserted and tok.kind is TokenKind.WORD:
                out.append(Token("also", "also", TokenKind.WORD, "ADV"))
                inserted = True
    return out


def _perturb_commas(tokens) -> list[Token]:
    """Thin out commas when present, otherwise introduce some."""
    comma_positions = [i for i, t in enumerate(tokens) if t.surface == ","]
    if comma_positions:
        drop = set(comma_positions[::2])
        return [t for i, t in enumerate(tokens) if i not in drop]

    segmented = split_sentences(list(tokens))
    out: list[Token] = []
    for sentence in segmented.sentences():
        n_words = sum(1 for t in sentence if t.kind is TokenKind.WORD)
        words_seen = 0
        for tok in sentence:
            out.append(tok)
            if tok.kind is TokenKind.WORD:
                words_seen += 1
                if n_words >= 4 and words_seen == 2:
                    out.append(_punct_token(","))
    return out


def rule_based_rewrite(text: str, target_features) -> str:
    """Deterministic perturbations for the targeted features.

    An empty target tuple is a no-op; with targets present, at least one
    perturbation is forced so the rewrite never silently degenerates to
    the identity (single-word inputs excepted).
    """
    targets = set(target_features)
    if not targets:
        return text
    tokens = tokenize(text)
    if not any(t.kind is TokenKind.WORD for t in tokens):
        return text
    original = _surfaces(tokens)

    if targets & _LEXICAL_TARGETS:
        tokens = _swap_hapaxes(tokens)
    if targets & _SENTENCE_TARGETS:
        tokens = _restructure_sentences(tokens)
    if targets & _STOPWORD_TARGETS:
        tokens = _insert_stopwords(tokens)
    if targets & _PUNCT_TARGETS:
        tokens = _perturb_commas(tokens)

    if _surfaces(tokens) == original:
        tokens = _restructure_sentences(tokens)
    if _surfaces(tokens) == original:
        tokens = _insert_stopwords(tokens)
    if _surfaces(tokens) == original:
        return text
    return _detokenize(tokens)


def simple_paraphrase(text: str) -> str:
    """Unguided baseline rewrite: synonym swaps where the bundled
    thesaurus has an entry, capped at 15% of the words."""
    tokens = tokenize(text)
    words = sum(1 for t in tokens if t.kind is TokenKind.WORD)
    if words == 0:
        return text
    cap = max(1, (words * 15) // 100)
    entries = thesaurus()
    out = []
    swapped = 0
    for tok in tokens:
        if (
            swapped < cap
            and tok.kind is TokenKind.WORD
            and not is_stopword(tok.lower)
            and tok.lower in entries
        ):
            out.append(_word_token(entries[tok.lower][0], like=tok))
            swapped += 1
        else:
            out.append(tok)
    if _surfaces(out) == _surfaces(tokens):
        return text
    return _detokenize(out)


def apply_defense(
    article_text: str,
    plan: RewritePlan,
    reference: MatchReference,
    provider,
    mode: str = "rule_based",
    strategy: str = "sala",
    threshold: float = 0.5,
    semantic_source: str = "lexicon",
    prompt_style: str = "guided",
) -> DefenseOutcome:
    """Rewrite the article per the plan and measure the effect.

    Reports the match likelihood against the given reference before and
    after, computed with the identical matcher configuration, plus the
    embedding-cosine utility score between original and rewrite.  A
    utility score below the plan's floor raises UtilityBelowFloorError
    (the outcome rides on the exception for inspection).
    """
    if not article_text:
        raise EmptyTextError("cannot defend empty text")

    pre_ctx = ArticleContext(
        text=article_text,
        profile=compute_features(article_text, semantic_source, provider=provider),
        embedding=provider.embed(article_text),
    )
    pre = match_candidate(pre_ctx, reference, strategy, provider, threshold)

    if mode == "rule_based":
        rewritten = rule_based_rewrite(article_text, plan.target_features)
    elif mode == "provider":
        if prompt_style == "guided":
            prompt = build_recompose_prompt(article_text, plan)
        elif prompt_style == "paraphrase":
            prompt = render_prompt("paraphrase", article_text=article_text)
        else:
            raise ValueError(f"unknown prompt_style: {prompt_style!r}")
        rewritten = provider.chat(ChatRequest.single(prompt))
    else:
        raise ValueError(f"unknown defense mode: {mode!r}")

    new_embedding = provider.embed(rewritten)
    utility = cosine(pre_ctx.embedding, new_embedding)
    post_ctx = ArticleContext(
        text=rewritten,
        profile=compute_features(rewritten, semantic_source, provider=provider),
        embedding=new_embedding,
    )
    post = match_candidate(post_ctx, reference, strategy, provider, threshold)

    outcome = DefenseOutcome(
        rewritten_text=rewritten,
        utility_score=utility,
        pre_likelihood=pre.likelihood,
        post_likelihood=post.likelihood,
        suggestions_used=plan.suggestions,
    )
    if utility < plan.utility_floor:
        raise UtilityBelowFloorError(utility, plan.utility_floor, outcome)
    return outcome
