"""Answer ranking for multilingual question answering.

English questions are matched against candidate sentences in English,
Arabic, and Chinese. Translation happens both ways: questions become
per-term probability distributions over collection-language words (via
word alignments, grammar rules, n-best derivations, or context tables),
and sentences arrive with their one-best English translation. Cosine
similarities over those views feed a balanced-subset logistic ensemble
that ranks the candidates; per-language ranked lists can be merged with
several heuristics, and runs are scored with truncated average
precision.
"""

from .classifier import (
    EnsembleModel,
    TrainConfig,
    TrainingExample,
    partition_balanced,
    predict,
    score,
    train_ensemble,
)
from .corpus import (
    Candidate,
    CorpusFormatError,
    Judgment,
    Question,
    load_corpus,
    load_judgments,
    load_questions,
    simplify_question,
)
from .data_selection import CRITERIA, filter_subset, select_best_subset
from .evaluation import (
    EvalReport,
    ap_k,
    kfold_split,
    mean_average_precision,
    paired_permutation_test,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    LanguageResources,
    TranslationTables,
    featurize_dataset,
    featurize_pair,
)
from .pipeline import ResourcePaths, RunConfig, run_pipeline
from .ranking import (
    RankedEntry,
    RankedList,
    language_ratio,
    learn_merge_weight,
    merge_alternate,
    merge_english_first,
    merge_uniform,
    merge_weighted,
    normalize_scores,
    rank,
)
from .synthetic import GeneratorSpec, generate, write_fixture
from .translation import (
    AlignedSentencePair,
    GrammarRule,
    NBestDerivation,
    ProbabilisticQuery,
    build_grammar_table,
    build_nbest_table,
    build_word_table,
    mask_contexts,
    term_distribution,
)
from .vectors import cosine, question_vector, sentence_vector

__version__ = "0.1.0"
