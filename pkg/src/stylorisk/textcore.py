"""Deterministic text primitives: tokenization, sentence segmentation,
syllable counting, stopwords, and a rule/lexicon part-of-speech tagger.

Everything here is a pure function over immutable inputs; the heavy
scanning loops live in the `_kernels` backend (compiled when available).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources

from . import _kernels

POS_TAGS = (
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
    "ADP", "CONJ", "NUM", "PRT", "PUNCT", "X",
)

_TERMINALS = frozenset(".!?")

# Suffix rules applied to unknown words, checked in order; the stem left
# after stripping must be at least two characters long.
_SUFFIX_RULES = (
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


class TokenKind(enum.Enum):
    WORD = "word"
    PUNCTUATION = "punctuation"
    NUMBER = "number"


_KIND_BY_CODE = {
    _kernels.KIND_WORD: TokenKind.WORD,
    _kernels.KIND_PUNCT: TokenKind.PUNCTUATION,
    _kernels.KIND_NUMBER: TokenKind.NUMBER,
}


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str
    kind: TokenKind
    pos: str = "X"

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")
        if (self.kind is TokenKind.PUNCTUATION) != (self.pos == "PUNCT"):
            raise ValueError("kind/pos mismatch for punctuation token")


@dataclass(frozen=True)
class SegmentedText:
    tokens: tuple[Token, ...]
    sentence_bounds: tuple[tuple[int, int], ...]

    def sentences(self):
        return [self.tokens[a:b] for a, b in self.sentence_bounds]


def _load_lines(name: str) -> list[str]:
    text = resources.files("stylorisk.data").joinpath(name).read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    return frozenset(_load_lines("stopwords.txt"))


@lru_cache(maxsize=1)
def abbreviations() -> frozenset[str]:
    return frozenset(_load_lines("abbreviations.txt"))


@lru_cache(maxsize=1)
def pos_lexicon() -> dict[str, str]:
    lexicon = {}
    for line in _load_lines("pos_lexicon.tsv"):
        word, tag = line.split("\t")
        lexicon[word] = tag
    return lexicon


def tokenize(text: str) -> list[Token]:
    """Split text into Word, Punctuation and Number tokens.

    Words are maximal letter runs, with an apostrophe included only when
    it sits between two letters; every other non-space character is a
    punctuation token of its own; digit runs are numbers.
    """
    tokens = []
    for start, end, code in _kernels.scan(text):
        kind = _KIND_BY_CODE[code]
        surface = text[start:end]
        if kind is TokenKind.PUNCTUATION:
            pos = "PUNCT"
        elif kind is TokenKind.NUMBER:
            pos = "NUM"
        else:
            pos = "X"
        tokens.append(Token(surface, surface.lower(), kind, pos))
    return tokens


def _abbreviation_before(tokens, punct_index: int) -> bool:
    """True when the '.' at punct_index sits inside a listed abbreviation.

    Checks the single preceding word (``dr``) and dotted initialisms
    (``u.s``): the chain of alternating word/'.' pairs ending at this
    period, optionally extended by the word right after it, so both
    periods of "U.S." are protected.
    """
    if tokens[punct_index].surface != ".":
        return False
    i = punct_index - 1
    if i < 0 or tokens[i].kind is not TokenKind.WORD:
        return False
    abbrevs = abbreviations()
    chain = [tokens[i].lower]
    j = i - 2
    while j >= 0 and tokens[j + 1].surface == "." and tokens[j].kind is TokenKind.WORD:
        chain.insert(0, tokens[j].lower)
        j -= 2
    for start in range(len(chain)):
        if ".".join(chain[start:]) in abbrevs:
            return True
    nxt = punct_index + 1
    if nxt < len(tokens) and tokens[nxt].kind is TokenKind.WORD:
        extended = chain + [tokens[nxt].lower]
        for start in range(len(extended) - 1):
            if ".".join(extended[start:]) in abbrevs:
                return True
    return False


def split_sentences(tokens: list[Token]) -> SegmentedText:
    """Group tokens into sentences on terminal punctuation.

    A '.', '!' or '?' ends a sentence unless the '.' closes a bundled
    abbreviation; trailing tokens without a terminal mark form a final
    sentence.
    """
    bounds = []
    start = 0
    for i, tok in enumerate(tokens):
        if (
            tok.kind is TokenKind.PUNCTUATION
            and tok.surface in _TERMINALS
            and not _abbreviation_before(tokens, i)
        ):
            bounds.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        bounds.append((start, len(tokens)))
    return SegmentedText(tuple(tokens), tuple(bounds))


def count_syllables(word: str) -> int:
    """Syllables of a lower-cased word: vowel groups, silent-e adjusted."""
    return _kernels.syllables(word)


def is_stopword(word: str) -> bool:
    """Membership test against the bundled stopword list."""
    return word in stopwords()


def _tag_word(lower: str) -> str:
    lexicon = pos_lexicon()
    tag = lexicon.get(lower)
    if tag is not None:
        return tag
    for suffix, suffix_tag in _SUFFIX_RULES:
        if lower.endswith(suffix) and len(lower) >= len(suffix) + 2:
            return suffix_tag
    return "NOUN"


def tag_pos(tokens: list[Token]) -> list[Token]:
    """Assign a coarse part-of-speech tag to every token.

    Word tags come from the bundled closed-class lexicon, then suffix
    rules, then the NOUN default; punctuation and numbers keep PUNCT/NUM.
    """
    tagged = []
    for tok in tokens:
        if tok.kind is TokenKind.WORD:
            tagged.append(replace(tok, pos=_tag_word(tok.lower)))
        else:
            tagged.append(tok)
    return tagged
