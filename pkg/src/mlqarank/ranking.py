"""Ranked answer lists: building, normalizing, and cross-language merging.

A single model can rank a mixed-language pool directly; per-language
models produce one list per language, which the merge heuristics here
combine into a final mixed list. All tie-breaks are deterministic:
within a list by candidate id, across lists by the fixed language order
en, ar, ch and then candidate id.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace

from .classifier import EnsembleModel, score
from .corpus import Candidate, Question, evaluation_label
from .evaluation import ap_k, mean_average_precision
from .features import PairDataset, TranslationTables, featurize_pair

LANGUAGE_ORDER = {"en": 0, "ar": 1, "ch": 2}

MERGE_STRATEGIES = ("uniform", "alternate", "english-first", "weighted")


@dataclass(frozen=True)
class RankedEntry:
    candidate_id: str
    language: str
    raw_score: float
    normalized_score: float


@dataclass(frozen=True)
class RankedList:
    question_id: str
    language: str  # en | ar | ch | mixed
    entries: tuple[RankedEntry, ...]


def ranked_list_from_scores(
    question_id: str,
    scored: Iterable[tuple[str, str, float]],
    n: int,
    language: str | None = None,
) -> RankedList:
    """Sort (candidate_id, language, score) triples into a top-n list.

    Equal scores are broken by candidate id. Until normalization the
    normalized score simply repeats the raw score.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ordered = sorted(scored, key=lambda t: (-t[2], t[0]))[:n]
    if language is None:
        languages = {lang for _, lang, _ in ordered}
        language = languages.pop() if len(languages) == 1 else "mixed"
    entries = tuple(RankedEntry(cid, lang, s, s) for cid, lang, s in ordered)
    return RankedList(question_id, language, entries)


def rank(
    model: EnsembleModel,
    question: Question,
    candidates: Sequence[Candidate],
    n: int,
    tables: TranslationTables,
    feature_set: str = "both",
    by_id: Mapping[str, Candidate] | None = None,
) -> RankedList:
    """Featurize and score a candidate pool, returning the top n."""
    index = dict(by_id) if by_id is not None else {c.id: c for c in candidates}
    scored = []
    for candidate in candidates:
        prev = index.get(candidate.prev_candidate_id) if candidate.prev_candidate_id else None
        fv = featurize_pair(question, candidate, tables, feature_set, prev)
        scored.append((candidate.id, candidate.language, score(model, fv)))
    return ranked_list_from_scores(question.id, scored, n)


def normalize_scores(ranked: RankedList) -> RankedList:
    """Min-max rescale raw scores into [0, 1]; constant lists map to 1.0."""
    if not ranked.entries:
        raise ValueError("empty ranked list")
    low = min(e.raw_score for e in ranked.entries)
    high = max(e.raw_score for e in ranked.entries)
    span = high - low
    entries = tuple(
        replace(e, normalized_score=1.0 if span == 0.0 else (e.raw_score - low) / span)
        for e in ranked.entries
    )
    return RankedList(ranked.question_id, ranked.language, entries)


def _merge_sort_key(entry: RankedEntry, weight_for=None):
    weighted = entry.normalized_score if weight_for is None else weight_for(entry)
    return (-weighted, LANGUAGE_ORDER.get(entry.language, len(LANGUAGE_ORDER)), entry.candidate_id)


def _dedupe(entries: Iterable[RankedEntry]) -> list[RankedEntry]:
    seen = set()
    unique = []
    for entry in entries:
        if entry.candidate_id not in seen:
            seen.add(entry.candidate_id)
            unique.append(entry)
    return unique


def _question_id(lists: Sequence[RankedList]) -> str:
    ids = {l.question_id for l in lists}
    if len(ids) != 1:
        raise ValueError("cannot merge lists for different questions")
    return ids.pop()


def merge_uniform(lists: Sequence[RankedList], n: int) -> RankedList:
    """Global sort of all entries by normalized score, top n."""
    question_id = _question_id(lists)
    pooled = [e for ranked in lists for e in ranked.entries]
    merged = _dedupe(sorted(pooled, key=_merge_sort_key))[:n]
    return RankedList(question_id, "mixed", tuple(merged))


def merge_alternate(lists: Sequence[RankedList], n: int) -> RankedList:
    """Round-robin over languages in en, ar, ch order, skipping empties."""
    question_id = _question_id(lists)
    ordered = sorted(lists, key=lambda l: LANGUAGE_ORDER.get(l.language, len(LANGUAGE_ORDER)))
    queues = [list(l.entries) for l in ordered]
    merged: list[RankedEntry] = []
    while len(merged) < n and any(queues):
        for queue in queues:
            if queue and len(merged) < n:
                merged.append(queue.pop(0))
    return RankedList(question_id, "mixed", tuple(_dedupe(merged)))


def merge_english_first(lists: Sequence[RankedList], n: int, threshold: float = 0.5) -> RankedList:
    """Confident English answers first, then a uniform merge of the rest."""
    question_id = _question_id(lists)
    english = [e for ranked in lists for e in ranked.entries if e.language == "en"]
    others = [e for ranked in lists for e in ranked.entries if e.language != "en"]
    head = [e for e in english if e.normalized_score > threshold]
    tail_pool = [e for e in english if e.normalized_score <= threshold] + others
    tail = sorted(tail_pool, key=_merge_sort_key)
    return RankedList(question_id, "mixed", tuple(_dedupe(head + tail)[:n]))


def merge_weighted(lists: Sequence[RankedList], n: int, english_weight: float) -> RankedList:
    """Uniform merge with English normalized scores scaled by a weight."""
    if english_weight <= 0:
        raise ValueError("english_weight must be > 0")
    question_id = _question_id(lists)
    pooled = [e for ranked in lists for e in ranked.entries]

    def weighted(entry: RankedEntry) -> float:
        if entry.language == "en":
            return entry.normalized_score * english_weight
        return entry.normalized_score

    merged = _dedupe(sorted(pooled, key=lambda e: _merge_sort_key(e, weighted)))[:n]
    return RankedList(question_id, "mixed", tuple(merged))


def learn_merge_weight(
    lists_by_question: Mapping[str, Sequence[RankedList]],
    relevant_ids: Mapping[str, set],
    total_relevant: Mapping[str, int],
    candidate_weights: Sequence[float],
    n: int,
    ap_cutoff: int = 20,
) -> dict[str, float]:
    """Per-question English weight by grid search over the other questions.

    For each question, every candidate weight is scored by the mean AP it
    achieves on all *other* questions (leave-one-question-out); ties pick
    the smaller weight.
    """
    if len(lists_by_question) < 2:
        raise ValueError("need at least 2 questions to learn merge weights")
    if not candidate_weights:
        raise ValueError("no candidate weights")
    weights = sorted(candidate_weights)
    question_ids = sorted(lists_by_question)
    ap_by_weight: dict[float, dict[str, float]] = {}
    for weight in weights:
        per_question = {}
        for question_id in question_ids:
            merged = merge_weighted(lists_by_question[question_id], n, weight)
            relevance = [e.candidate_id in relevant_ids[question_id] for e in merged.entries]
            per_question[question_id] = ap_k(relevance, ap_cutoff, total_relevant[question_id])
        ap_by_weight[weight] = per_question
    chosen = {}
    for question_id in question_ids:
        best_weight = None
        best_map = None
        for weight in weights:
            held_out = [
                ap for qid, ap in ap_by_weight[weight].items() if qid != question_id
            ]
            held_out_map = mean_average_precision(held_out)
            if best_map is None or held_out_map > best_map:
                best_weight, best_map = weight, held_out_map
        chosen[question_id] = best_weight
    return chosen


def language_ratio(ranked: RankedList) -> tuple[float, float, float]:
    """Percentage of entries per source language, ordered (en, ch, ar)."""
    if not ranked.entries:
        raise ValueError("empty ranked list")
    total = len(ranked.entries)
    counts = {"en": 0, "ch": 0, "ar": 0}
    for entry in ranked.entries:
        counts[entry.language] += 1
    return (
        100.0 * counts["en"] / total,
        100.0 * counts["ch"] / total,
        100.0 * counts["ar"] / total,
    )


def pooled_language_ratio(lists: Iterable[RankedList]) -> tuple[float, float, float] | None:
    """Language shares pooled over several questions' lists."""
    entries = [e for ranked in lists for e in ranked.entries]
    if not entries:
        return None
    pooled = RankedList("-", "mixed", tuple(entries))
    return language_ratio(pooled)


# ---------------------------------------------------------------------------
# Scoring helpers over a featurized dataset
# ---------------------------------------------------------------------------


def score_question_pool(
    dataset: PairDataset,
    model: EnsembleModel,
    question_id: str,
    language: str | None = None,
) -> list[tuple[str, str, float]]:
    """Score a question's judged candidates, optionally one language only."""
    scored = []
    for judgment in dataset.judgments_by_question.get(question_id, []):
        candidate = dataset.candidates[judgment.candidate_id]
        if language is not None and candidate.language != language:
            continue
        fv = dataset.features[(question_id, judgment.candidate_id)]
        scored.append((judgment.candidate_id, candidate.language, score(model, fv)))
    return scored


def question_relevance(dataset: PairDataset, question_id: str) -> tuple[set, int]:
    """Ground-truth relevant candidate ids for a question, and their count."""
    relevant = {
        j.candidate_id
        for j in dataset.judgments_by_question.get(question_id, [])
        if evaluation_label(j)
    }
    return relevant, len(relevant)


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def write_ranked_lists(lists: Iterable[RankedList], path) -> None:
    """Write ``question_id rank candidate_id language raw norm`` lines."""
    with open(path, "w", encoding="utf-8") as handle:
        for ranked in lists:
            for position, entry in enumerate(ranked.entries, 1):
                handle.write(
                    f"{ranked.question_id}\t{position}\t{entry.candidate_id}\t"
                    f"{entry.language}\t{entry.raw_score!r}\t{entry.normalized_score!r}\n"
                )


def read_ranked_lists(path) -> dict[str, RankedList]:
    """Read ranked lists grouped by question; ranks must be contiguous."""
    grouped: dict[str, list[tuple[int, RankedEntry]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 tab-separated fields")
            question_id, rank_text, candidate_id, language, raw_text, norm_text = fields
            entry = RankedEntry(candidate_id, language, float(raw_text), float(norm_text))
            grouped.setdefault(question_id, []).append((int(rank_text), entry))
    lists = {}
    for question_id, rows in grouped.items():
        rows.sort(key=lambda r: r[0])
        if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
            raise ValueError(f"{path}: non-contiguous ranks for question {question_id!r}")
        entries = tuple(entry for _, entry in rows)
        languages = {e.language for e in entries}
        language = languages.pop() if len(languages) == 1 else "mixed"
        lists[question_id] = RankedList(question_id, language, entries)
    return lists
