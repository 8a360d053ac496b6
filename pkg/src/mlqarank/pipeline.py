"""End-to-end driver: load, featurize, cross-validate, rank, report.

Every run is deterministic given its input files and configuration: fold
splits and negative-subset shuffles derive from the configured seed, all
iteration is over sorted ids, and emitted files contain no timestamps.
Two modes exist: a single model scoring candidates of every language in
one pool, or one model per language whose ranked lists are merged.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import TrainConfig, TrainingExample, train_ensemble
from .corpus import (
    DEFAULT_STOPWORDS,
    DEFAULT_TEMPLATES,
    Candidate,
    Judgment,
    Question,
    load_corpus,
    load_judgments,
    load_patterns,
    load_questions,
    load_token_set,
)
from .data_selection import filter_subset
from .evaluation import EvalReport, ap_k, kfold_split, report_from_ap, write_report
from .features import (
    CL_METHODS,
    FEATURE_SETS,
    LanguageResources,
    PairDataset,
    TranslationTables,
    featurize_dataset,
)
from .ranking import (
    MERGE_STRATEGIES,
    RankedList,
    merge_alternate,
    merge_english_first,
    merge_uniform,
    merge_weighted,
    normalize_scores,
    pooled_language_ratio,
    question_relevance,
    ranked_list_from_scores,
    score_question_pool,
    write_ranked_lists,
)

RANKING_MODES = ("single", "per-language")


@dataclass(frozen=True)
class ResourcePaths:
    questions: Path
    corpus: Path
    judgments: Path
    tables_dir: Path | None = None
    stopwords: Path | None = None
    templates: Path | None = None
    output_dir: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    feature_set: str = "both"
    subset: str = "all"
    mode: str = "single"
    seed: int = 0
    ap_cutoff: int = 20
    folds: int = 5
    list_size: int = 20
    merge_strategy: str = "uniform"
    merge_threshold: float = 0.5
    merge_weight: float = 1.0
    l2: float = 1.0
    figures: bool = True

    def __post_init__(self) -> None:
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature set {self.feature_set!r}")
        if self.mode not in RANKING_MODES:
            raise ValueError(f"unknown ranking mode {self.mode!r}")
        if self.merge_strategy not in MERGE_STRATEGIES:
            raise ValueError(f"unknown merge strategy {self.merge_strategy!r}")
        if self.ap_cutoff < 1:
            raise ValueError("ap_cutoff must be >= 1")
        if self.folds < 2:
            raise ValueError("fold count must be >= 2")
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")

    def train_config(self) -> TrainConfig:
        return TrainConfig(l2=self.l2, seed=self.seed)


def required_methods(feature_set: str) -> tuple[str, ...]:
    return CL_METHODS if feature_set in ("cl", "both") else ()


def load_language_resources(
    tables_dir, language: str, methods: Sequence[str]
) -> LanguageResources:
    """Load only the table files the requested methods actually need."""
    from .translation import read_grammar, read_nbest, read_translation_table

    tables_dir = Path(tables_dir) if tables_dir is not None else None
    resources = LanguageResources()
    for method in methods:
        path = tables_dir / f"{language}.{method}.tsv" if tables_dir is not None else None
        if path is None or not path.exists():
            raise ValueError(f"missing resource: {method} ({language})")
        if method == "word":
            resources.word_table = read_translation_table(path)
        elif method == "context":
            resources.context_table = read_translation_table(path)
        elif method == "grammar":
            resources.grammar_rules = read_grammar(path)
        elif method == "nbest":
            resources.nbest = read_nbest(path)
        else:
            raise ValueError(f"unknown translation method {method!r}")
    return resources


def load_tables(
    tables_dir, languages: Sequence[str], feature_set: str
) -> TranslationTables:
    methods = required_methods(feature_set)
    resources = {}
    for language in sorted(set(languages) - {"en"}):
        if methods:
            resources[language] = load_language_resources(tables_dir, language, methods)
    return TranslationTables(resources)


def load_inputs(
    paths: ResourcePaths,
) -> tuple[list[Question], list[Candidate], list[Judgment]]:
    stopwords = load_token_set(paths.stopwords) if paths.stopwords else DEFAULT_STOPWORDS
    templates = load_patterns(paths.templates) if paths.templates else DEFAULT_TEMPLATES
    questions = load_questions(paths.questions, stopwords, templates)
    candidates = load_corpus(paths.corpus)
    judgments = load_judgments(paths.judgments)
    return questions, candidates, judgments


def build_dataset(paths: ResourcePaths, feature_set: str) -> PairDataset:
    """Load all inputs and featurize every judged pair."""
    questions, candidates, judgments = load_inputs(paths)
    languages = sorted({c.language for c in candidates})
    tables = load_tables(paths.tables_dir, languages, feature_set)
    return featurize_dataset(questions, candidates, judgments, tables, feature_set)


@dataclass
class PipelineResult:
    report: EvalReport
    final_lists: dict[str, RankedList] = field(default_factory=dict)
    output_files: list[Path] = field(default_factory=list)


def _train_fold_models(
    dataset: PairDataset, train_ids: Sequence[str], config: RunConfig
) -> dict[str, object]:
    """One model keyed '*' (single mode) or one per trainable language."""
    train_set = set(train_ids)
    train_judgments = [j for j in dataset.judgments if j.question_id in train_set]
    selected = filter_subset(train_judgments, dataset.candidates, config.subset)
    if config.mode == "single":
        labels = set(selected.values())
        if labels != {0, 1}:
            raise ValueError("degenerate training fold: need positives and negatives")
        examples = [TrainingExample(dataset.features[p], lab) for p, lab in selected.items()]
        return {"*": train_ensemble(examples, config.train_config())}
    models = {}
    languages = sorted({c.language for c in dataset.candidates.values()})
    for language in languages:
        pairs = {
            pair: label
            for pair, label in selected.items()
            if dataset.candidates[pair[1]].language == language
        }
        if set(pairs.values()) != {0, 1}:
            continue
        examples = [TrainingExample(dataset.features[p], lab) for p, lab in pairs.items()]
        models[language] = train_ensemble(examples, config.train_config())
    if not models:
        raise ValueError("degenerate training fold: no language has both labels")
    return models


def _merge(lists: list[RankedList], config: RunConfig) -> RankedList:
    if config.merge_strategy == "uniform":
        return merge_uniform(lists, config.list_size)
    if config.merge_strategy == "alternate":
        return merge_alternate(lists, config.list_size)
    if config.merge_strategy == "english-first":
        return merge_english_first(lists, config.list_size, config.merge_threshold)
    return merge_weighted(lists, config.list_size, config.merge_weight)


def rank_question(
    dataset: PairDataset, models: dict, question_id: str, config: RunConfig
) -> RankedList | None:
    """Produce the final list for one question under the configured mode."""
    if config.mode == "single":
        scored = score_question_pool(dataset, models["*"], question_id)
        if not scored:
            return None
        return ranked_list_from_scores(question_id, scored, config.list_size)
    per_language = []
    for language in sorted(models, key=lambda l: (l != "en", l)):
        scored = score_question_pool(dataset, models[language], question_id, language)
        if not scored:
            continue
        ranked = ranked_list_from_scores(question_id, scored, len(scored), language)
        per_language.append(normalize_scores(ranked))
    if not per_language:
        return None
    return _merge(per_language, config)


def run_pipeline(config: RunConfig, paths: ResourcePaths) -> PipelineResult:
    """Cross-validated end-to-end run; writes ranked lists, report, figures.

    Each fold trains on the other folds' judged pairs (filtered by the
    configured data subset) and ranks its own questions, so every
    question is scored exactly once by a model that never saw it.
    """
    dataset = build_dataset(paths, config.feature_set)
    question_ids = sorted(q.id for q in dataset.questions)
    splits = kfold_split(question_ids, config.folds, config.seed)
    final_lists: dict[str, RankedList] = {}
    per_question_ap: dict[str, float] = {}
    for train_ids, test_ids in splits:
        models = _train_fold_models(dataset, train_ids, config)
        for question_id in test_ids:
            ranked = rank_question(dataset, models, question_id, config)
            if ranked is None:
                continue
            final_lists[question_id] = ranked
            relevant_ids, total_relevant = question_relevance(dataset, question_id)
            relevance = [e.candidate_id in relevant_ids for e in ranked.entries]
            per_question_ap[question_id] = ap_k(relevance, config.ap_cutoff, total_relevant)
    if not per_question_ap:
        raise ValueError("no question produced a ranked list")
    ratio = pooled_language_ratio(final_lists[qid] for qid in sorted(final_lists))
    report = report_from_ap(per_question_ap, config.ap_cutoff, language_ratio=ratio)
    result = PipelineResult(report, final_lists)
    if paths.output_dir is not None:
        result.output_files = _emit_outputs(result, config, paths.output_dir)
    return result


def _emit_outputs(result: PipelineResult, config: RunConfig, output_dir) -> list[Path]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    ranked_path = output_dir / "ranked.tsv"
    report_path = output_dir / "report.tsv"
    ordered = [result.final_lists[qid] for qid in sorted(result.final_lists)]
    write_ranked_lists(ordered, ranked_path)
    write_report(result.report, report_path)
    files = [ranked_path, report_path]
    if config.figures:
        from .figures import render_ap_figure, render_language_figure

        ap_png = output_dir / "report_ap.png"
        render_ap_figure(result.report, ap_png)
        files.append(ap_png)
        if result.report.language_ratio is not None:
            lang_png = output_dir / "report_languages.png"
            render_language_figure(result.report.language_ratio, lang_png)
            files.append(lang_png)
    return files
