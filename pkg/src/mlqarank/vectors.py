"""Sparse word-weight vectors for questions and candidate sentences.

A vector is a plain ``dict[str, float]`` with strictly positive weights;
words with zero weight are simply absent. Question vectors average the
per-term translation probabilities of each target word, sentence vectors
are normalized word frequencies, and similarity is plain cosine.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence

WeightedVector = dict[str, float]

# Weights below this threshold are dropped from sparse storage.
PRUNE_EPS = 1e-12


def question_vector(term_distributions: Sequence[Mapping[str, float]]) -> WeightedVector:
    """Average per-term translation probabilities into one sparse vector.

    Each distribution maps target-language words to probabilities for one
    question term; a word missing from a term's distribution contributes 0
    for that term. Empty distributions (untranslatable terms) still count
    toward the denominator, diluting the average.
    """
    dists = list(term_distributions)
    if not dists:
        raise ValueError("question has no terms")
    n_terms = float(len(dists))
    totals: dict[str, float] = {}
    for dist in dists:
        for word in sorted(dist):
            totals[word] = totals.get(word, 0.0) + dist[word]
    vec = {}
    for word in sorted(totals):
        weight = totals[word] / n_terms
        if weight > PRUNE_EPS:
            vec[word] = weight
    return vec


def sentence_vector(tokens: Iterable[str]) -> WeightedVector:
    """Normalized word frequencies of a token sequence."""
    toks = list(tokens)
    if not toks:
        raise ValueError("empty sentence")
    total = float(len(toks))
    counts = Counter(toks)
    return {word: counts[word] / total for word in sorted(counts)}


def cosine(u: Mapping[str, float], v: Mapping[str, float]) -> float:
    """Cosine similarity of two nonnegative sparse vectors, in [0, 1].

    Defined as 0.0 when either vector is empty, so fully untranslatable
    questions still produce a valid (uninformative) feature value.
    """
    if not u or not v:
        return 0.0
    dot = 0.0
    for word in sorted(u.keys() & v.keys()):
        dot += u[word] * v[word]
    if dot == 0.0:
        return 0.0
    norm_u = math.sqrt(sum(x * x for x in u.values()))
    norm_v = math.sqrt(sum(x * x for x in v.values()))
    return min(dot / (norm_u * norm_v), 1.0)


def l1_norm(vec: Mapping[str, float]) -> float:
    return sum(vec.values())


def vector_to_tsv(vec: Mapping[str, float]) -> str:
    """Debug dump: one ``word<TAB>weight`` line, heaviest words first."""
    lines = [
        f"{word}\t{weight!r}"
        for word, weight in sorted(vec.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return "\n".join(lines)
