#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--words N] [--repeat R]
"""

from __future__ import annotations

import argparse
import random
import time

from stylorisk._kernels import _pykernels

try:
    from stylorisk._kernels import _ckernels
except ImportError:
    _ckernels = None


def make_text(n_words: int, seed: int = 1234) -> str:
    rng = random.Random(seed)
    vocab = []
    for _ in range(2000):
        length = rng.randint(3, 10)
        vocab.append(
            "".join(rng.choice("bcdfgklmnprstvz" if i % 2 == 0 else "aeiou") for i in range(length))
        )
    words = []
    for i in range(n_words):
        words.append(rng.choice(vocab))
        if i % 12 == 11:
            words[-1] += "."
        elif i % 7 == 6:
            words[-1] += ","
    return " ".join(words)


def bench(func, arg, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        func(arg)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--words", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    text = make_text(args.words)
    sample_words = [w.strip(".,") for w in text.split()][:50_000]

    def syllables_all(impl):
        def run(words):
            total = 0
            for w in words:
                total += impl.syllables(w)
            return total

        return run

    rows = []
    for name, func_py, func_c in (
        ("scan", _pykernels.scan, _ckernels.scan if _ckernels else None),
        ("bow256", _pykernels.bow256, _ckernels.bow256 if _ckernels else None),
    ):
        t_py = bench(func_py, text, args.repeat)
        t_c = bench(func_c, text, args.repeat) if func_c else None
        rows.append((name, t_py, t_c))

    t_py = bench(syllables_all(_pykernels), sample_words, args.repeat)
    t_c = bench(syllables_all(_ckernels), sample_words, args.repeat) if _ckernels else None
    rows.append(("syllables", t_py, t_c))

    if _ckernels is not None:
        assert _ckernels.scan(text) == _pykernels.scan(text)
        assert _ckernels.bow256(text) == _pykernels.bow256(text)
        print("backend equivalence: OK")
    else:
        print("compiled backend not available; showing pure-Python only")

    print(f"{'kernel':<12} {'pure-python':>12} {'compiled':>12} {'speedup':>9}")
    for name, t_py, t_c in rows:
        if t_c:
            print(f"{name:<12} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms {t_py / t_c:>8.1f}x")
        else:
            print(f"{name:<12} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
