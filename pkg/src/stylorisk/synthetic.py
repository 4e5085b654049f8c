"""Synthetic corpora with controlled style separation.

Two generators:

- a separable corpus where each author's nine numeric features are
  pinned exactly (only punctuation alternates, giving every sample the
  same unit z-score), and authors come in vocabulary-twin pairs whose
  bag-of-words distributions match in expectation, so feature-based
  matching separates perfectly while embedding similarity cannot;
- a disjoint-vocabulary corpus where every author writes from a private
  word pool, the regime in which keyword/embedding retrieval should be
  exact.

All randomness flows from explicit seeds; generation is deterministic.
"""

from __future__ import annotations

import random

from .store import Article
from .stylometry import NUMERIC_FEATURES, aggregate, compute_features, format_value
from .textcore import pos_lexicon, stopwords

_CONSONANTS = "bdgkmnprtvwz"
_VOWELS = "aiou"

# (first-word, ...) cycles; every entry must be in the stopword list.
_STOP_CYCLES = (
    ("the", "of", "and", "a"),
    ("in", "on", "the", "with"),
    ("he", "she", "they", "it"),
    ("but", "or", "if", "and"),
)

_SENTENCES_PER_SAMPLE = 8

# Word shapes per target length: alternating consonant/vowel patterns
# with a fixed number of vowel groups and no silent-e/suffix artifacts.
_PATTERNS = {
    4: "cvcv",
    5: "cvcvc",
    6: "cvccvc",
    7: "cvccvcv",
    8: "cvccvcvc",
    9: "cvccvcvcv",
    10: "cvccvcvcvc",
}


def _reserved_words() -> set[str]:
    from .defense import thesaurus
    from .stylometry import sentiment_lexicon

    reserved = set(stopwords()) | set(pos_lexicon())
    reserved |= set(sentiment_lexicon())
    reserved |= set(thesaurus())
    return reserved


def _pseudo_word(rng: random.Random, length: int) -> str:
    pattern = _PATTERNS[length]
    return "".join(
        rng.choice(_CONSONANTS) if c == "c" else rng.choice(_VOWELS) for c in pattern
    )


def _word_pool(rng: random.Random, length: int, size: int, taken: set[str]) -> list[str]:
    pool = []
    attempts = 0
    while len(pool) < size:
        attempts += 1
        if attempts > 100 * size:
            raise RuntimeError(f"length-{length} word space too crowded for pool of {size}")
        word = _pseudo_word(rng, length)
        if word not in taken:
            taken.add(word)
            pool.append(word)
    return pool


class _AuthorTemplate:
    def __init__(self, name, sentence_len, stop_per_sentence, comma_base, cycle, pool):
        self.name = name
        self.sentence_len = sentence_len
        self.stop_per_sentence = stop_per_sentence
        self.comma_base = comma_base
        self.cycle = cycle
        self.pool = pool

    def render_samples(self, rng: random.Random, count: int) -> list[str]:
        texts = []
        content_per_sample = _SENTENCES_PER_SAMPLE * (self.sentence_len - self.stop_per_sentence)
        for sample_idx in range(count):
            commas = self.comma_base + (1 if sample_idx % 2 else 0)
            content = rng.sample(self.pool, content_per_sample)
            content_iter = iter(content)
            sentences = []
            slot = 0
            for _ in range(_SENTENCES_PER_SAMPLE):
                words = []
                for _ in range(self.stop_per_sentence):
                    words.append(self.cycle[slot % len(self.cycle)])
                    slot += 1
                for _ in range(self.sentence_len - self.stop_per_sentence):
                    words.append(next(content_iter))
                words[0] = words[0].capitalize()
                parts = []
                for i, word in enumerate(words):
                    parts.append(word)
                    if commas >= 1 and i == 1:
                        parts[-1] += ","
                    if commas >= 2 and i == 3:
                        parts[-1] += ","
                sentences.append(" ".join(parts) + ".")
            texts.append(" ".join(sentences))
        return texts


def _verify_constant_rendering(texts: list[str]):
    """Constant features must render identically for samples and the
    aggregate mean, or stub scoring would see phantom distances."""
    profiles = [compute_features(t, "lexicon") for t in texts]
    agg = aggregate(profiles)
    for name in NUMERIC_FEATURES:
        if agg.stds[name] == 0.0:
            mean_rendered = f"{agg.means[name]:.4f}"
            for p in profiles:
                value_rendered = format_value(name, getattr(p, name))
                if float(value_rendered) != float(mean_rendered):
                    raise AssertionError(
                        f"feature {name} renders {value_rendered} vs mean {mean_rendered}"
                    )
    return profiles, agg


def _verify_separation(per_author, min_sigma_gap: float = 5.0):
    names = sorted(per_author)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            _, agg_a = per_author[a]
            _, agg_b = per_author[b]
            best = 0.0
            for name in NUMERIC_FEATURES:
                gap = abs(agg_a.means[name] - agg_b.means[name])
                pooled = max(
                    ((agg_a.stds[name] ** 2 + agg_b.stds[name] ** 2) / 2.0) ** 0.5, 1e-9
                )
                best = max(best, gap / pooled)
            if best < min_sigma_gap:
                raise AssertionError(f"authors {a} and {b} separated by only {best:.2f} sigma")


def make_separable_corpus(
    n_authors: int = 20,
    samples_per_author: int = 20,
    held_out: int = 2,
    seed: int = 42,
    verify: bool = True,
) -> tuple[list[Article], list[Article]]:
    """Corpus of style-separable authors arranged in vocabulary twins.

    Twin authors share a content-word pool, stopword cycle and stopword
    RATIO but differ in sentence length (L vs 2L), so their word
    distributions agree in expectation while their feature profiles sit
    far apart.  Returns (training articles, held-out articles).
    """
    if n_authors < 2 or n_authors > 20:
        raise ValueError("separable corpus supports 2..20 authors")
    rng = random.Random(seed)
    taken = _reserved_words()

    templates = []
    n_pairs = (n_authors + 1) // 2
    for pair in range(n_pairs):
        base_len = 6 + pair % 5
        word_len = 4 + 2 * (pair % 4)
        cycle = _STOP_CYCLES[pair % 4]
        pool = _word_pool(rng, word_len, 400, taken)
        templates.append(
            _AuthorTemplate(
                name=f"author{2 * pair:02d}",
                sentence_len=base_len,
                stop_per_sentence=2,
                comma_base=pair % 2,
                cycle=cycle,
                pool=pool,
            )
        )
        if 2 * pair + 1 < n_authors:
            templates.append(
                _AuthorTemplate(
                    name=f"author{2 * pair + 1:02d}",
                    sentence_len=2 * base_len,
                    stop_per_sentence=4,
                    comma_base=pair % 2,
                    cycle=cycle,
                    pool=pool,
                )
            )
    templates = templates[:n_authors]

    train: list[Article] = []
    heldout: list[Article] = []
    per_author = {}
    for template in templates:
        texts = template.render_samples(rng, samples_per_author + held_out)
        if verify:
            per_author[template.name] = _verify_constant_rendering(texts[:samples_per_author])
        for j, text in enumerate(texts):
            article = Article(
                id=f"{template.name}-s{j:03d}",
                title=f"Sample {j} by {template.name}",
                body=text,
                author=template.name,
            )
            (train if j < samples_per_author else heldout).append(article)
    if verify:
        _verify_separation(per_author)
    return train, heldout


def make_disjoint_corpus(
    n_authors: int = 50,
    samples_per_author: int = 5,
    held_out: int = 5,
    seed: int = 7,
) -> tuple[list[Article], list[Article]]:
    """Corpus where every author writes from a private vocabulary pool.

    Sentence shapes vary freely; only retrieval behavior matters here.
    Returns (training articles, held-out articles).
    """
    rng = random.Random(seed)
    taken = _reserved_words()
    stop_list = sorted(stopwords())

    train: list[Article] = []
    heldout: list[Article] = []
    for a in range(n_authors):
        name = f"writer{a:03d}"
        pool = []
        while len(pool) < 60:
            # re-roll the length every attempt so one saturated length
            # class cannot stall generation
            length = rng.choice((5, 6, 7, 8, 9))
            word = _pseudo_word(rng, length)
            if word not in taken:
                taken.add(word)
                pool.append(word)
        for j in range(samples_per_author + held_out):
            n_sentences = rng.randint(6, 10)
            sentences = []
            for _ in range(n_sentences):
                n_words = rng.randint(8, 14)
                words = []
                for w in range(n_words):
                    if rng.random() < 0.25:
                        words.append(rng.choice(stop_list))
                    else:
                        words.append(rng.choice(pool))
                words[0] = words[0].capitalize()
                parts = []
                for i, word in enumerate(words):
                    parts.append(word)
                    if 0 < i < n_words - 1 and rng.random() < 0.12:
                        parts[-1] += ","
                terminal = "?" if rng.random() < 0.08 else "."
                sentences.append(" ".join(parts) + terminal)
            article = Article(
                id=f"{name}-s{j:03d}",
                title=f"Sample {j} by {name}",
                body=" ".join(sentences),
                author=name,
            )
            (train if j < samples_per_author else heldout).append(article)
    return train, heldout
