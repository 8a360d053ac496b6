"""Training-data subsets keyed on answer language and annotation language.

Judged pairs can carry a grade assigned on the original text, on its
English translation, or both. The criteria here materialize the useful
subsets of that data (per-language slices, consistently-judged pairs,
annotation-side preferences) and pick the best one by cross-validated
mean average precision, training on the filtered folds but always
evaluating on untouched test folds.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .classifier import TrainConfig, TrainingExample, train_ensemble
from .corpus import Candidate, Judgment, is_consistent, is_relevant_grade
from .evaluation import ap_k, kfold_split, mean_average_precision
from .features import PairDataset
from .ranking import question_relevance, ranked_list_from_scores, score_question_pool

CRITERIA = ("en", "ar", "ch", "consist", "src_plus", "en_plus", "all")


def _in_subset(judgment: Judgment, language: str, criterion: str) -> bool:
    if criterion in ("en", "ar", "ch"):
        return language == criterion
    if criterion == "consist":
        return is_consistent(judgment)
    if criterion == "src_plus":
        return judgment.source_score is not None and is_consistent(judgment)
    if criterion == "en_plus":
        return judgment.en_score is not None and is_consistent(judgment)
    if criterion == "all":
        return True
    raise ValueError(f"unknown subset criterion {criterion!r}")


def training_label(judgment: Judgment, criterion: str) -> bool:
    """The binary label the criterion privileges for a retained pair."""
    if criterion == "src_plus":
        score = judgment.source_score
    elif criterion == "en_plus":
        score = judgment.en_score
    else:
        score = judgment.source_score if judgment.source_score is not None else judgment.en_score
    assert score is not None
    return is_relevant_grade(score)


def filter_subset(
    judgments: Sequence[Judgment],
    candidates: Mapping[str, Candidate],
    criterion: str,
) -> dict[tuple[str, str], int]:
    """Retained (question_id, candidate_id) pairs with their training labels."""
    selected: dict[tuple[str, str], int] = {}
    for judgment in sorted(judgments, key=lambda j: (j.question_id, j.candidate_id)):
        candidate = candidates.get(judgment.candidate_id)
        if candidate is None:
            raise ValueError(f"judgment references unknown candidate {judgment.candidate_id!r}")
        if _in_subset(judgment, candidate.language, criterion):
            selected[(judgment.question_id, judgment.candidate_id)] = int(
                training_label(judgment, criterion)
            )
    return selected


@dataclass
class SelectionResult:
    best: str
    cv_map: dict[str, float | None]  # None when a training fold was degenerate
    retained: dict[str, int]


def select_best_subset(
    criteria: Sequence[str],
    dataset: PairDataset,
    folds: int,
    seed: int,
    config: TrainConfig = TrainConfig(),
    ap_cutoff: int = 20,
) -> SelectionResult:
    """Cross-validate every criterion and return the one with highest MAP.

    Filtering touches only the training folds; each test fold is ranked
    over its full judged pool. A criterion whose filtered training data
    lacks a positive or a negative in some fold is marked unevaluable.
    Ties go to the criterion listed first.
    """
    question_ids = sorted(q.id for q in dataset.questions)
    splits = kfold_split(question_ids, folds, seed)
    cv_map: dict[str, float | None] = {}
    retained = {
        criterion: len(filter_subset(dataset.judgments, dataset.candidates, criterion))
        for criterion in criteria
    }
    for criterion in criteria:
        ap_values = []
        degenerate = False
        for train_ids, test_ids in splits:
            train_set = set(train_ids)
            train_judgments = [j for j in dataset.judgments if j.question_id in train_set]
            selected = filter_subset(train_judgments, dataset.candidates, criterion)
            labels = set(selected.values())
            if labels != {0, 1}:
                degenerate = True
                break
            examples = [
                TrainingExample(dataset.features[pair], label)
                for pair, label in selected.items()
            ]
            model = train_ensemble(examples, config)
            for question_id in test_ids:
                scored = score_question_pool(dataset, model, question_id)
                if not scored:
                    continue
                relevant_ids, total_relevant = question_relevance(dataset, question_id)
                ranked = ranked_list_from_scores(question_id, scored, len(scored))
                relevance = [entry.candidate_id in relevant_ids for entry in ranked.entries]
                ap_values.append(ap_k(relevance, ap_cutoff, total_relevant))
        cv_map[criterion] = None if degenerate else mean_average_precision(ap_values)
    best = None
    best_map = None
    for criterion in criteria:
        value = cv_map[criterion]
        if value is None:
            continue
        if best_map is None or value > best_map:
            best, best_map = criterion, value
    if best is None:
        raise ValueError("no criterion was evaluable")
    return SelectionResult(best, cv_map, retained)
