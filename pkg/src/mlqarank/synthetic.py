"""Deterministic synthetic corpora for end-to-end testing.

The generator builds an English question set over a toy vocabulary and,
for each non-English language, a synonym family per vocabulary word. A
configurable fraction of relevant non-English answers is written with a
secondary synonym that the emitted one-best translation garbles, while
the probabilistic tables keep mass on every synonym. That makes the
value of probabilistic translation measurable: one-best similarity
misses those answers, translation-distribution similarity does not.

Optionally the generator also plants hallucinated candidates: their
one-best "translation" fabricates the question terms while the original
sentence is off-topic, so one-best similarity is fooled in the other
direction too. Label noise (when enabled) flips the source-side grade of
doubly annotated pairs whose one-best view is misleading (secondary
relevant and hallucinated ones), so the flipped pairs are exactly the
inconsistent pairs and carry a wrong source label while the English
grade stays truthful.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Candidate,
    Judgment,
    Question,
    simplify_question,
    write_corpus,
    write_judgments,
    write_questions,
)
from .features import LanguageResources
from .translation import (
    AlignedSentencePair,
    GrammarRule,
    NBestDerivation,
    build_word_table,
    write_aligned_corpus,
    write_grammar,
    write_nbest,
    write_translation_table,
)

TARGET_LANGUAGES = ("ar", "ch")

NBEST_SIZE = 10


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    n_questions: int = 24
    terms_per_question: int = 3
    english_vocab: int = 60
    distractor_vocab: int = 40
    synonym_fanout: int = 3
    synonym_fraction: float = 0.5
    relevant_per_language: int = 2
    irrelevant_per_language: int = 4
    # non-English candidates whose one-best translation hallucinates the
    # question terms while the original text is off-topic
    hallucinated_per_language: int = 0
    doubly_annotated_fraction: float = 1.0
    label_noise: float = 0.0
    sentence_length: int = 6

    def __post_init__(self) -> None:
        for name in ("synonym_fraction", "doubly_annotated_fraction", "label_noise"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")
        if self.synonym_fanout < 1:
            raise ValueError("synonym_fanout must be >= 1")
        if self.terms_per_question > self.english_vocab:
            raise ValueError("not enough vocabulary for the requested question length")
        if self.sentence_length < self.terms_per_question:
            raise ValueError("sentences must be long enough to hold every question term")


@dataclass
class SyntheticFixture:
    spec: GeneratorSpec
    questions: list[Question]
    candidates: list[Candidate]
    judgments: list[Judgment]
    resources: dict[str, LanguageResources]
    aligned: dict[str, list[AlignedSentencePair]]
    # (question_id, candidate_id) -> True when the pair is relevant and was
    # realized with a secondary synonym (invisible to one-best translation)
    secondary_relevant: dict[tuple[str, str], bool] = field(default_factory=dict)
    # pairs whose one-best translation fabricates the question terms
    hallucinated: set[tuple[str, str]] = field(default_factory=set)


def _synonym(language: str, word_index: int, rank: int) -> str:
    return f"{language}{word_index:03d}s{rank}"


def _garble(token: str) -> str:
    # Stand-in for a mistranslation: unique, never matches question terms.
    return f"mt-{token}"


def generate(spec: GeneratorSpec) -> SyntheticFixture:
    """Build the full fixture; identical specs produce identical output."""
    rng = random.Random(spec.seed)
    english = [f"w{i:03d}" for i in range(spec.english_vocab)]
    en_distractors = [f"den{i:03d}" for i in range(spec.distractor_vocab)]
    distractors = {
        lang: [f"{lang}dis{i:03d}" for i in range(spec.distractor_vocab)]
        for lang in TARGET_LANGUAGES
    }
    word_index = {word: i for i, word in enumerate(english)}
    synonym_weights = [spec.synonym_fanout - j for j in range(spec.synonym_fanout)]
    # the one-best system only knows the primary synonym of each word
    primary_back = {
        lang: {_synonym(lang, i, 0): word for i, word in enumerate(english)}
        for lang in TARGET_LANGUAGES
    }

    aligned: dict[str, list[AlignedSentencePair]] = {}
    grammar: dict[str, list[GrammarRule]] = {}
    context: dict[str, dict[str, dict[str, float]]] = {}
    for lang in TARGET_LANGUAGES:
        pairs = []
        rules = []
        ctx_table = {}
        for word in english:
            i = word_index[word]
            synonyms = [_synonym(lang, i, j) for j in range(spec.synonym_fanout)]
            for j, synonym in enumerate(synonyms):
                for _ in range(synonym_weights[j]):
                    pairs.append(
                        AlignedSentencePair((word,), (synonym,), frozenset({(0, 0)}))
                    )
                rules.append(
                    GrammarRule(
                        (word,), (synonym,), frozenset({(0, 0)}), float(synonym_weights[j])
                    )
                )
            ctx_table[word] = {s: 1.0 / spec.synonym_fanout for s in synonyms}
        # one unaligned occurrence, so raw word-table mass stays below one
        pairs.append(AlignedSentencePair(("padword",), ("padtarget",), frozenset()))
        aligned[lang] = pairs
        grammar[lang] = rules
        context[lang] = ctx_table

    questions = []
    candidates: list[Candidate] = []
    judgments: list[Judgment] = []
    secondary_relevant: dict[tuple[str, str], bool] = {}
    hallucinated: set[tuple[str, str]] = set()
    nbest: dict[str, dict[str, list[NBestDerivation]]] = {lang: {} for lang in TARGET_LANGUAGES}

    for qi in range(spec.n_questions):
        question_id = f"q{qi:03d}"
        terms = rng.sample(english, spec.terms_per_question)
        raw_text = "Tell me about the " + " and the ".join(terms)
        question = Question(question_id, raw_text, tuple(simplify_question(raw_text)))
        assert question.terms == tuple(terms)
        questions.append(question)

        for lang in TARGET_LANGUAGES:
            derivations = []
            for rank in range(1, NBEST_SIZE + 1):
                used = []
                for term in terms:
                    j = rng.choices(range(spec.synonym_fanout), weights=synonym_weights)[0]
                    used.append(
                        GrammarRule(
                            (term,),
                            (_synonym(lang, word_index[term], j),),
                            frozenset({(0, 0)}),
                            float(synonym_weights[j]),
                        )
                    )
                derivations.append(NBestDerivation(rank, tuple(used)))
            nbest[lang][question_id] = derivations

        for lang in ("en",) + TARGET_LANGUAGES:
            doc_id = f"{lang}-doc-{question_id}"
            kinds = ["rel"] * spec.relevant_per_language + ["irr"] * spec.irrelevant_per_language
            if lang != "en":
                kinds += ["hal"] * spec.hallucinated_per_language
            rng.shuffle(kinds)
            prev_id = None
            for position, kind in enumerate(kinds):
                candidate_id = f"{question_id}-{lang}-{position:02d}"
                relevant = kind == "rel"
                pad = spec.sentence_length - (spec.terms_per_question if relevant else 0)
                if lang == "en":
                    content = list(terms) if relevant else []
                    content += rng.sample(en_distractors, pad)
                    rng.shuffle(content)
                    tokens = tuple(content)
                    onebest = tokens
                    judgment = Judgment(
                        question_id,
                        candidate_id,
                        None,
                        rng.choice((3, 4, 5)) if relevant else rng.choice((1, 2)),
                    )
                else:
                    secondary = (
                        relevant
                        and spec.synonym_fanout >= 2
                        and rng.random() < spec.synonym_fraction
                    )
                    j = 1 if secondary else 0
                    content = (
                        [_synonym(lang, word_index[t], j) for t in terms] if relevant else []
                    )
                    content += rng.sample(distractors[lang], pad)
                    rng.shuffle(content)
                    tokens = tuple(content)
                    if kind == "hal":
                        # translation hallucinated the question terms
                        onebest = tuple(terms)
                    else:
                        onebest = tuple(
                            primary_back[lang].get(tok, _garble(tok)) for tok in tokens
                        )
                    source_grade = rng.choice((3, 4, 5)) if relevant else rng.choice((1, 2))
                    # noise flips the source grade of doubly annotated pairs
                    # whose one-best view is misleading, making them the
                    # inconsistent pairs with a wrong source-side label
                    noise_eligible = secondary or kind == "hal"
                    if rng.random() < spec.doubly_annotated_fraction:
                        en_grade = rng.choice((3, 4, 5)) if relevant else rng.choice((1, 2))
                        if noise_eligible and rng.random() < spec.label_noise:
                            source_grade = (
                                rng.choice((1, 2)) if relevant else rng.choice((3, 4, 5))
                            )
                        judgment = Judgment(question_id, candidate_id, source_grade, en_grade)
                    elif rng.random() < 0.5:
                        judgment = Judgment(question_id, candidate_id, source_grade, None)
                    else:
                        judgment = Judgment(question_id, candidate_id, None, source_grade)
                    if relevant:
                        secondary_relevant[(question_id, candidate_id)] = secondary
                    if kind == "hal":
                        hallucinated.add((question_id, candidate_id))
                candidates.append(
                    Candidate(candidate_id, doc_id, lang, position, tokens, onebest, prev_id)
                )
                judgments.append(judgment)
                prev_id = candidate_id

    resources = {}
    for lang in TARGET_LANGUAGES:
        word_table = build_word_table(aligned[lang])
        resources[lang] = LanguageResources(
            word_table=word_table,
            context_table=context[lang],
            grammar_rules=grammar[lang],
            nbest=nbest[lang],
        )
    return SyntheticFixture(
        spec, questions, candidates, judgments, resources, aligned,
        secondary_relevant, hallucinated,
    )


def write_fixture(fixture: SyntheticFixture, outdir) -> list[Path]:
    """Write every fixture file in the pipeline's input formats."""
    outdir = Path(outdir)
    tables = outdir / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(path: Path, writer, payload) -> None:
        writer(payload, path)
        written.append(path)

    emit(outdir / "questions.tsv", write_questions, fixture.questions)
    emit(outdir / "corpus.tsv", write_corpus, fixture.candidates)
    emit(outdir / "judgments.tsv", write_judgments, fixture.judgments)
    for lang, resources in sorted(fixture.resources.items()):
        emit(tables / f"{lang}.word.tsv", write_translation_table, resources.word_table)
        emit(tables / f"{lang}.context.tsv", write_translation_table, resources.context_table)
        emit(tables / f"{lang}.grammar.tsv", write_grammar, resources.grammar_rules)
        emit(tables / f"{lang}.nbest.tsv", write_nbest, resources.nbest)
        emit(tables / f"{lang}.alignments.tsv", write_aligned_corpus, fixture.aligned[lang])
    return written
