# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of `_pykernels`; must stay bit-identical in behavior."""

from cpython.unicode cimport Py_UNICODE_ISALPHA, Py_UNICODE_ISDIGIT, Py_UNICODE_ISSPACE

KIND_WORD = 0
KIND_PUNCT = 1
KIND_NUMBER = 2

cdef unsigned long long _FNV_OFFSET = 0xCBF29CE484222325ULL
cdef unsigned long long _FNV_PRIME = 0x100000001B3ULL


cdef inline bint _is_apostrophe(Py_UCS4 ch):
    return ch == 0x27 or ch == 0x2019


def scan(str text):
    """Split text into (start, end, kind) token spans."""
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j
    cdef Py_UCS4 ch, cj
    spans = []
    while i < n:
        ch = text[i]
        if Py_UNICODE_ISSPACE(ch):
            i += 1
        elif Py_UNICODE_ISALPHA(ch):
            j = i + 1
            while j < n:
                cj = text[j]
                if Py_UNICODE_ISALPHA(cj):
                    j += 1
                elif _is_apostrophe(cj) and j + 1 < n and Py_UNICODE_ISALPHA(text[j + 1]):
                    j += 2
                else:
                    break
            spans.append((i, j, 0))
            i = j
        elif Py_UNICODE_ISDIGIT(ch):
            j = i + 1
            while j < n and Py_UNICODE_ISDIGIT(text[j]):
                j += 1
            spans.append((i, j, 2))
            i = j
        else:
            spans.append((i, i + 1, 1))
            i += 1
    return spans


def syllables(str word):
    """Count vowel groups, silent final 'e' discounted, minimum 1."""
    cdef Py_ssize_t n = len(word)
    cdef Py_ssize_t i
    cdef Py_UCS4 ch
    cdef int groups = 0
    cdef bint prev_vowel = False, is_vowel
    for i in range(n):
        ch = word[i]
        is_vowel = (ch == u'a' or ch == u'e' or ch == u'i' or
                    ch == u'o' or ch == u'u' or ch == u'y')
        if is_vowel and not prev_vowel:
            groups += 1
        prev_vowel = is_vowel
    if n > 2 and word[n - 1] == u'e' and not (word[n - 2] == u'l'):
        groups -= 1
    return groups if groups >= 1 else 1


def fnv1a64(bytes data):
    """64-bit FNV-1a hash of a bytes object."""
    cdef unsigned long long h = _FNV_OFFSET
    cdef unsigned char b
    for b in data:
        h = (h ^ b) * _FNV_PRIME
    return h


def bow256(str text):
    """Raw 256-bucket hashed bag-of-words counts over lower-cased words."""
    cdef list counts = [0.0] * 256
    cdef unsigned long long h
    cdef unsigned char b
    cdef Py_ssize_t start, end
    cdef int kind
    for start, end, kind in scan(text):
        if kind == 0:
            h = _FNV_OFFSET
            for b in text[start:end].lower().encode("utf-8"):
                h = (h ^ b) * _FNV_PRIME
            counts[<Py_ssize_t>(h & 0xFF)] = <double>counts[<Py_ssize_t>(h & 0xFF)] + 1.0
    return counts
