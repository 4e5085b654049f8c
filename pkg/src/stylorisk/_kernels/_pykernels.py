"""Pure-Python reference implementation of the hot text-scanning kernels.

The compiled module `_ckernels` implements exactly the same three
functions; results must be bit-identical between the two backends.
Any change here must be mirrored in `_ckernels.pyx`.
"""

KIND_WORD = 0
KIND_PUNCT = 1
KIND_NUMBER = 2

# ASCII apostrophe and the typographic right single quote join a word
# only when flanked by letters; anywhere else they are punctuation.
_APOSTROPHES = ("'", "’")

_VOWELS = frozenset("aeiouy")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def scan(text):
    """Split text into (start, end, kind) token spans.

    Letters (plus letter-flanked apostrophes) form word spans, digit runs
    form number spans, every other non-space character is a single-char
    punctuation span.  Whitespace separates spans and is never emitted.
    """
    spans = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isalpha():
            j = i + 1
            while j < n:
                cj = text[j]
                if cj.isalpha():
                    j += 1
                elif cj in _APOSTROPHES and j + 1 < n and text[j + 1].isalpha():
                    j += 2
                else:
                    break
            spans.append((i, j, KIND_WORD))
            i = j
        elif ch.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            spans.append((i, j, KIND_NUMBER))
            i = j
        else:
            spans.append((i, i + 1, KIND_PUNCT))
            i += 1
    return spans


def syllables(word):
    """Count vowel groups in a lower-cased word, silent final 'e' discounted.

    A trailing 'e' is silent when the word is longer than two characters
    and does not end in 'le'.  Every word counts at least one syllable.
    """
    groups = 0
    prev_vowel = False
    for ch in word:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if len(word) > 2 and word.endswith("e") and not word.endswith("le"):
        groups -= 1
    return groups if groups >= 1 else 1


def fnv1a64(data):
    """64-bit FNV-1a hash of a bytes object (stable across platforms)."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def bow256(text):
    """Raw 256-bucket hashed bag-of-words counts over lower-cased words.

    Single pass: scans, case-folds and hashes in one go.  Returns a plain
    list of 256 floats (unnormalized counts).
    """
    counts = [0.0] * 256
    for start, end, kind in scan(text):
        if kind == KIND_WORD:
            h = fnv1a64(text[start:end].lower().encode("utf-8"))
            counts[h & 0xFF] += 1.0
    return counts
