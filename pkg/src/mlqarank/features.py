"""Similarity features for (question, candidate) pairs.

Ten features per pair: four collection-language similarities (translated
question vs. original sentence, one per translation method), one
question-language similarity (original question vs. one-best translated
sentence), and the same five computed against the sentence preceding the
candidate in its document. Features outside the requested feature set are
written as exact zeros and flagged inactive so the trainer can skip them.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .corpus import Candidate, Judgment, Question, previous_candidate
from .translation import (
    Distribution,
    GrammarRule,
    NBestDerivation,
    ProbabilisticQuery,
    build_grammar_table,
    build_nbest_table,
    probabilistic_query_from_table,
)
from .vectors import WeightedVector, cosine, question_vector, sentence_vector

CL_METHODS = ("word", "nbest", "context", "grammar")

FEATURE_NAMES = (
    "cl_word",
    "cl_nbest",
    "cl_context",
    "cl_grammar",
    "ql_onebest",
    "prev_cl_word",
    "prev_cl_nbest",
    "prev_cl_context",
    "prev_cl_grammar",
    "prev_ql_onebest",
)

FEATURE_SETS = ("cl", "ql", "both")

_CL_INDICES = (0, 1, 2, 3, 5, 6, 7, 8)
_QL_INDICES = (4, 9)


def active_mask(feature_set: str) -> tuple[bool, ...]:
    if feature_set not in FEATURE_SETS:
        raise ValueError(f"unknown feature set {feature_set!r}")
    if feature_set == "both":
        return (True,) * len(FEATURE_NAMES)
    indices = _CL_INDICES if feature_set == "cl" else _QL_INDICES
    return tuple(i in indices for i in range(len(FEATURE_NAMES)))


@dataclass(frozen=True)
class FeatureVector:
    """Feature values in canonical order plus an activity mask."""

    values: tuple[float, ...]
    active: tuple[bool, ...]
    label: int | None = None

    def __post_init__(self) -> None:
        if len(self.values) != len(FEATURE_NAMES) or len(self.active) != len(FEATURE_NAMES):
            raise ValueError(f"feature vector must have {len(FEATURE_NAMES)} entries")
        for name, value in zip(FEATURE_NAMES, self.values):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"feature {name} = {value!r} outside [0, 1]")


@dataclass
class LanguageResources:
    """Translation resources for one collection language."""

    word_table: dict[str, Distribution] | None = None
    context_table: dict[str, Distribution] | None = None
    grammar_rules: list[GrammarRule] | None = None
    nbest: dict[str, list[NBestDerivation]] | None = None


class TranslationTables:
    """Per-language translation resources with per-question vector caching.

    English candidates are compared through an identity translation, so
    their collection-language similarities coincide exactly with the
    question-language one.
    """

    def __init__(self, resources: Mapping[str, LanguageResources] | None = None):
        self.resources: dict[str, LanguageResources] = dict(resources or {})
        self._vector_cache: dict[tuple[str, str, str], WeightedVector] = {}
        self._query_cache: dict[tuple[str, str, str], ProbabilisticQuery] = {}

    def probabilistic_query(
        self, question: Question, language: str, method: str
    ) -> ProbabilisticQuery:
        key = (question.id, language, method)
        cached = self._query_cache.get(key)
        if cached is not None:
            return cached
        if language == "en":
            pq = ProbabilisticQuery(tuple({term: 1.0} for term in question.terms))
        else:
            pq = self._build_query(question, language, method)
        self._query_cache[key] = pq
        question.translations[(language, method)] = pq
        return pq

    def _build_query(self, question: Question, language: str, method: str) -> ProbabilisticQuery:
        resources = self.resources.get(language)
        if method == "word":
            table = resources.word_table if resources else None
            if table is None:
                raise ValueError(f"missing resource: word ({language})")
            return probabilistic_query_from_table(table, question.terms)
        if method == "context":
            table = resources.context_table if resources else None
            if table is None:
                raise ValueError(f"missing resource: context ({language})")
            return probabilistic_query_from_table(table, question.terms)
        if method == "grammar":
            rules = resources.grammar_rules if resources else None
            if rules is None:
                raise ValueError(f"missing resource: grammar ({language})")
            return build_grammar_table(rules, question.terms)
        if method == "nbest":
            nbest = resources.nbest if resources else None
            if nbest is None:
                raise ValueError(f"missing resource: nbest ({language})")
            derivations = nbest.get(question.id)
            if not derivations:
                return ProbabilisticQuery(tuple({} for _ in question.terms))
            return build_nbest_table(derivations, question.terms)
        raise ValueError(f"unknown translation method {method!r}")

    def question_cl_vector(self, question: Question, language: str, method: str) -> WeightedVector:
        key = (question.id, language, method)
        cached = self._vector_cache.get(key)
        if cached is None:
            cached = question_vector(self.probabilistic_query(question, language, method).term_distributions)
            self._vector_cache[key] = cached
        return cached


def _pair_values(
    question: Question, candidate: Candidate, tables: TranslationTables, feature_set: str
) -> list[float]:
    values = [0.0] * 5
    if feature_set in ("cl", "both"):
        svec = sentence_vector(candidate.tokens)
        for i, method in enumerate(CL_METHODS):
            qvec = tables.question_cl_vector(question, candidate.language, method)
            values[i] = cosine(qvec, svec)
    if feature_set in ("ql", "both"):
        qvec = sentence_vector(question.terms)
        values[4] = cosine(qvec, sentence_vector(candidate.onebest_en_tokens))
    return values


def featurize_pair(
    question: Question,
    candidate: Candidate,
    tables: TranslationTables,
    feature_set: str = "both",
    prev: Candidate | None = None,
    label: int | None = None,
) -> FeatureVector:
    """Compute the full feature vector for one (question, candidate) pair.

    ``prev`` is the candidate preceding this one in its document; when
    absent all discourse copies are 0.
    """
    mask = active_mask(feature_set)
    values = _pair_values(question, candidate, tables, feature_set)
    if prev is not None:
        if prev.id != candidate.prev_candidate_id:
            raise ValueError(
                f"candidate {candidate.id!r} does not follow {prev.id!r}"
            )
        values.extend(_pair_values(question, prev, tables, feature_set))
    else:
        values.extend([0.0] * 5)
    return FeatureVector(tuple(values), mask, label)


@dataclass
class PairDataset:
    """A featurized corpus: everything needed to train, rank, and score."""

    questions: list[Question]
    candidates: dict[str, Candidate]
    judgments: list[Judgment]
    features: dict[tuple[str, str], FeatureVector]
    feature_set: str = "both"
    judgments_by_question: dict[str, list[Judgment]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.judgments_by_question:
            for judgment in self.judgments:
                self.judgments_by_question.setdefault(judgment.question_id, []).append(judgment)


def featurize_dataset(
    questions: Sequence[Question],
    candidates: Sequence[Candidate] | Mapping[str, Candidate],
    judgments: Sequence[Judgment],
    tables: TranslationTables,
    feature_set: str = "both",
) -> PairDataset:
    """Featurize every judged pair, resolving preceding-sentence links."""
    if isinstance(candidates, Mapping):
        by_id = dict(candidates)
    else:
        by_id = {c.id: c for c in candidates}
    by_question = {q.id: q for q in questions}
    features: dict[tuple[str, str], FeatureVector] = {}
    for judgment in sorted(judgments, key=lambda j: (j.question_id, j.candidate_id)):
        question = by_question.get(judgment.question_id)
        if question is None:
            raise ValueError(f"judgment references unknown question {judgment.question_id!r}")
        candidate = by_id.get(judgment.candidate_id)
        if candidate is None:
            raise ValueError(f"judgment references unknown candidate {judgment.candidate_id!r}")
        prev = previous_candidate(candidate, by_id)
        features[(judgment.question_id, judgment.candidate_id)] = featurize_pair(
            question, candidate, tables, feature_set, prev
        )
    return PairDataset(list(questions), by_id, list(judgments), features, feature_set)


def write_features(
    rows: Iterable[tuple[str, str, int | None, FeatureVector]], path
) -> None:
    """Write ``question_id  candidate_id  label|-  f1..f10`` lines."""
    with open(path, "w", encoding="utf-8") as handle:
        for question_id, candidate_id, label, fv in rows:
            label_text = "-" if label is None else str(label)
            values = "\t".join(repr(v) for v in fv.values)
            handle.write(f"{question_id}\t{candidate_id}\t{label_text}\t{values}\n")


def read_features(path, feature_set: str = "both") -> list[tuple[str, str, FeatureVector]]:
    """Read a feature file; the activity mask is implied by ``feature_set``."""
    mask = active_mask(feature_set)
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3 + len(FEATURE_NAMES):
                raise ValueError(
                    f"{path}:{lineno}: expected {3 + len(FEATURE_NAMES)} fields, got {len(fields)}"
                )
            question_id, candidate_id, label_text = fields[:3]
            label = None if label_text == "-" else int(label_text)
            values = tuple(float(v) for v in fields[3:])
            rows.append((question_id, candidate_id, FeatureVector(values, mask, label)))
    return rows
