"""Ranking quality metrics and the paired significance test.

Collections here can carry hundreds of known relevant answers per
question, so average precision is truncated: precision is accumulated at
each relevant hit until k relevant answers have been found, and divided
by min(k, total_relevant). Relevant answers never retrieved contribute
zero. MAP is the mean over questions; differences between two runs are
tested with a two-sided sign-flip permutation test over per-question AP.
"""

from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

DEFAULT_AP_CUTOFF = 20

_TIE_EPS = 1e-12


def ap_k(ranked_relevance: Sequence[bool], k: int, total_relevant: int) -> float:
    """Average precision truncated at the k-th relevant hit.

    ``ranked_relevance`` flags each retrieved item, best first;
    ``total_relevant`` counts all known relevant answers, retrieved or
    not. Defined as 0.0 when nothing relevant exists.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if total_relevant < 0:
        raise ValueError("total_relevant must be >= 0")
    denominator = min(k, total_relevant)
    if denominator == 0:
        return 0.0
    hits = 0
    accumulated = 0.0
    for position, relevant in enumerate(ranked_relevance, 1):
        if relevant:
            hits += 1
            accumulated += hits / position
            if hits == denominator:
                break
    return accumulated / denominator


def mean_average_precision(ap_values: Sequence[float]) -> float:
    if not ap_values:
        raise ValueError("no AP values")
    return sum(ap_values) / len(ap_values)


def kfold_split(
    question_ids: Sequence[str], k: int, seed: int
) -> list[tuple[list[str], list[str]]]:
    """Disjoint near-equal test folds over questions, seed-deterministic.

    Returns (train_ids, test_ids) pairs; the test folds cover every
    question exactly once.
    """
    ids = sorted(question_ids)
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate question ids")
    if k < 2:
        raise ValueError("fold count must be >= 2")
    if k > len(ids):
        raise ValueError(f"fold count {k} exceeds question count {len(ids)}")
    random.Random(seed).shuffle(ids)
    base, extra = divmod(len(ids), k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(ids[start : start + size])
        start += size
    splits = []
    for i, fold in enumerate(folds):
        train = [qid for j, other in enumerate(folds) if j != i for qid in other]
        splits.append((sorted(train), sorted(fold)))
    return splits


def paired_permutation_test(
    ap_a: Sequence[float],
    ap_b: Sequence[float],
    iterations: int = 10000,
    seed: int = 0,
    exact: bool | None = None,
) -> float:
    """Two-sided sign-flip permutation test on per-question AP differences.

    All 2^n sign patterns are enumerated when that is no more work than
    the requested iterations; otherwise a seeded Monte Carlo estimate
    with the add-one correction is returned, so p is always in (0, 1].
    """
    if len(ap_a) != len(ap_b):
        raise ValueError("AP lists have different lengths")
    n = len(ap_a)
    if n < 2:
        raise ValueError("need at least 2 paired observations")
    diffs = np.array([a - b for a, b in zip(ap_a, ap_b)])
    observed = abs(float(diffs.mean()))
    if exact is None:
        exact = 2**n <= iterations
    if exact:
        count = 0
        total = 1 << n
        chunk = 1 << 16
        for start in range(0, total, chunk):
            masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
            signs = ((masks[:, None] >> np.arange(n)) & 1) * 2 - 1
            means = np.abs(signs @ diffs) / n
            count += int((means >= observed - _TIE_EPS).sum())
        return count / total
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(iterations, n)) * 2 - 1
    means = np.abs(signs @ diffs) / n
    count = int((means >= observed - _TIE_EPS).sum())
    return (count + 1) / (iterations + 1)


@dataclass
class EvalReport:
    """Per-question AP values plus the aggregate views of one run."""

    k: int
    per_question: dict[str, float]
    map_score: float
    language_ratio: tuple[float, float, float] | None = None  # (en, ch, ar) percent
    p_value: float | None = None

    def to_tsv(self) -> str:
        lines = ["metric\tquestion\tvalue"]
        for question_id in sorted(self.per_question):
            lines.append(f"ap_{self.k}\t{question_id}\t{self.per_question[question_id]!r}")
        lines.append(f"map\t-\t{self.map_score!r}")
        if self.language_ratio is not None:
            en, ch, ar = self.language_ratio
            lines.append(f"language_pct_en\t-\t{en!r}")
            lines.append(f"language_pct_ch\t-\t{ch!r}")
            lines.append(f"language_pct_ar\t-\t{ar!r}")
        if self.p_value is not None:
            lines.append(f"p_value\t-\t{self.p_value!r}")
        return "\n".join(lines) + "\n"


def write_report(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(report.to_tsv())


def report_from_ap(
    per_question: Mapping[str, float],
    k: int,
    language_ratio: tuple[float, float, float] | None = None,
    p_value: float | None = None,
) -> EvalReport:
    values = dict(per_question)
    return EvalReport(k, values, mean_average_precision(list(values.values())), language_ratio, p_value)
