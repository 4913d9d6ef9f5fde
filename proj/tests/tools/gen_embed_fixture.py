#!/usr/bin/env python3
"""Generate frozen expected values for the reference hashing embedder.

Independent of the C++ implementation: recomputes FNV-1a, bucketing,
signing, and normalization from first principles and prints constants
to paste into tests.
"""
import math

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK
    return h


def feature_hash(feature: str, seed: int) -> int:
    return fnv1a64(feature.encode("utf-8")) ^ seed


def word_features(word: str, orders, unigrams: bool):
    feats = []
    if unigrams:
        feats.append(word)
    for n in sorted(orders):
        if len(word) < n:
            continue
        grams = [word[i:i + n] for i in range(len(word) - n + 1)]
        marked = []
        for i, g in enumerate(grams):
            m = g
            if i == 0:
                m = "^" + m
            if i == len(grams) - 1:
                m = m + "$"
            marked.append(m)
        feats.extend(marked)
    return feats


def raw_features(text: str, dim: int, seed: int, orders, unigrams=True, bigrams=True):
    words = text.lower().split()
    counts = {}
    for w in words:
        for f in word_features(w, orders, unigrams):
            h = feature_hash(f, seed)
            b = h % dim
            s = -1 if (h >> 63) & 1 else 1
            counts[b] = counts.get(b, 0) + s
    if bigrams:
        for a, b_ in zip(words, words[1:]):
            f = a + " " + b_
            h = feature_hash(f, seed)
            bk = h % dim
            s = -1 if (h >> 63) & 1 else 1
            counts[bk] = counts.get(bk, 0) + s
    return counts


def show(text, dim, seed, orders, unigrams=True, bigrams=True):
    words = text.lower().split()
    print(f"== text={text!r} D={dim} seed={seed} orders={sorted(orders)} uni={unigrams} bi={bigrams}")
    for w in words:
        for f in word_features(w, orders, unigrams):
            h = feature_hash(f, seed)
            print(f"  feature {f!r}: hash={h:#018x} bucket={h % dim} sign={-1 if (h >> 63) & 1 else 1}")
    if bigrams:
        for a, b_ in zip(words, words[1:]):
            f = a + " " + b_
            h = feature_hash(f, seed)
            print(f"  feature {f!r}: hash={h:#018x} bucket={h % dim} sign={-1 if (h >> 63) & 1 else 1}")
    counts = raw_features(text, dim, seed, orders, unigrams, bigrams)
    print("  raw:", dict(sorted(counts.items())))
    norm = math.sqrt(sum(v * v for v in counts.values()))
    dense = [counts.get(i, 0) / norm for i in range(dim)]
    print("  normalized:", ["%.17g" % x for x in dense])


show("cat", 16, 0, {3})
show("cat", 16, 0, set(), unigrams=True, bigrams=False)
show("cat dog", 16, 0, {3})
