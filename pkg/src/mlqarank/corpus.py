"""Questions, candidate sentences, relevance judgments, and their files.

All files are line-oriented UTF-8 with tab-separated fields; token lists
are space-separated inside a tab field. Loaders validate every record and
report the offending line number on failure. Loaded collections are plain
immutable values, safe to share across threads.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

LANGUAGES = ("en", "ar", "ch")

# Grades run 1..5; this is the threshold for binary relevance.
RELEVANT_GRADE = 3

MISSING = "-"

# Small bundled English defaults; callers normally supply their own lists.
DEFAULT_STOPWORDS = frozenset(
    """
    a about an and are as at be been by did do does for from had has have
    how i in is it its me my of on or our should that the their them they
    this to us was we were what when where which who why will with would
    you your
    """.split()
)

DEFAULT_TEMPLATES = (
    "tell me about",
    "tell me",
    "give me information about",
    "give me information on",
    "what do you know about",
    "i would like to know about",
    "find information about",
)

_PUNCTUATION = ".,;:!?\"'()[]{}<>"


class CorpusFormatError(ValueError):
    """A data file failed validation; the message names file and line."""


@dataclass
class Question:
    id: str
    raw_text: str
    terms: tuple[str, ...]
    # (language, method) -> ProbabilisticQuery, attached once tables load.
    translations: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Candidate:
    id: str
    doc_id: str
    language: str
    position: int
    tokens: tuple[str, ...]
    onebest_en_tokens: tuple[str, ...]
    prev_candidate_id: str | None = None


@dataclass(frozen=True)
class Judgment:
    question_id: str
    candidate_id: str
    source_score: int | None
    en_score: int | None


def is_relevant_grade(score: int) -> bool:
    return score >= RELEVANT_GRADE


def is_consistent(judgment: Judgment) -> bool:
    """Whether the two annotations (when both exist) agree on binary relevance."""
    if judgment.source_score is None or judgment.en_score is None:
        return True
    return is_relevant_grade(judgment.source_score) == is_relevant_grade(judgment.en_score)


def evaluation_label(judgment: Judgment) -> bool:
    """Ground-truth relevance for evaluation: the English-side annotation
    when present, else the source-side one. Answers are delivered to an
    English speaker, so the English judgment is the user-facing one."""
    score = judgment.en_score if judgment.en_score is not None else judgment.source_score
    assert score is not None
    return is_relevant_grade(score)


def simplify_question(
    raw_text: str,
    stopwords: frozenset[str] | set[str] = DEFAULT_STOPWORDS,
    template_patterns: Sequence[str] = DEFAULT_TEMPLATES,
) -> list[str]:
    """Reduce a natural-language question to its content terms.

    Lowercases, strips any leading template phrase (e.g. "tell me about"),
    drops surrounding punctuation and stopwords, and preserves term order.
    Idempotent on its own output.
    """
    if not raw_text.strip():
        raise ValueError("empty question")
    text = raw_text.lower().strip()
    templates = sorted((t.lower().strip() for t in template_patterns), key=len, reverse=True)
    stripped = True
    while stripped:
        stripped = False
        for template in templates:
            if text == template:
                text = ""
            elif text.startswith(template + " "):
                text = text[len(template) :].strip()
            else:
                continue
            stripped = True
            break
    terms = []
    for token in text.split():
        token = token.strip(_PUNCTUATION)
        if token and token not in stopwords:
            terms.append(token)
    if not terms:
        raise ValueError("empty question")
    return terms


def load_token_set(path) -> frozenset[str]:
    """One token per line; blank lines and '#' comments are ignored."""
    tokens = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                tokens.add(line.lower())
    return frozenset(tokens)


def load_patterns(path) -> tuple[str, ...]:
    """One template phrase per line; blank lines and '#' comments are ignored."""
    patterns = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                patterns.append(line.lower())
    return tuple(patterns)


def _fields(line: str, expected: int, where: str) -> list[str]:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != expected:
        raise CorpusFormatError(f"{where}: expected {expected} tab-separated fields, got {len(fields)}")
    return fields


def load_questions(
    path,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    template_patterns: Sequence[str] = DEFAULT_TEMPLATES,
) -> list[Question]:
    """Read an ``id<TAB>raw_text`` file and simplify every question."""
    questions = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            qid, raw_text = _fields(line, 2, f"{path}: line {lineno}")
            if qid in seen:
                raise CorpusFormatError(f"{path}: line {lineno}: duplicate question id {qid!r}")
            seen.add(qid)
            try:
                terms = simplify_question(raw_text, stopwords, template_patterns)
            except ValueError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: {exc}") from exc
            questions.append(Question(qid, raw_text, tuple(terms)))
    return questions


def load_corpus(path) -> list[Candidate]:
    """Read candidate sentences and resolve preceding-sentence links.

    Format per line: ``id doc_id language position tokens onebest prev``
    (tab-separated). The one-best field may be ``-`` for English
    candidates, meaning identical to the original tokens. A ``prev`` entry
    must name a candidate in the same document at the previous position.
    """
    candidates = []
    by_id: dict[str, Candidate] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            where = f"{path}: line {lineno}"
            cid, doc_id, language, pos_text, tokens_text, onebest_text, prev_text = _fields(
                line, 7, where
            )
            if language not in LANGUAGES:
                raise CorpusFormatError(f"{where}: unknown language {language!r}")
            try:
                position = int(pos_text)
            except ValueError as exc:
                raise CorpusFormatError(f"{where}: bad position {pos_text!r}") from exc
            if position < 0:
                raise CorpusFormatError(f"{where}: negative position")
            tokens = tuple(tokens_text.split())
            if not tokens:
                raise CorpusFormatError(f"{where}: empty token list")
            if onebest_text == MISSING:
                if language != "en":
                    raise CorpusFormatError(f"{where}: missing one-best translation")
                onebest = tokens
            else:
                onebest = tuple(onebest_text.split())
                if language == "en" and onebest != tokens:
                    raise CorpusFormatError(f"{where}: English one-best must equal tokens")
            if not onebest:
                raise CorpusFormatError(f"{where}: empty one-best token list")
            prev_id = None if prev_text == MISSING else prev_text
            if cid in by_id:
                raise CorpusFormatError(f"{where}: duplicate candidate id {cid!r}")
            candidate = Candidate(cid, doc_id, language, position, tokens, onebest, prev_id)
            by_id[cid] = candidate
            candidates.append(candidate)
    for candidate in candidates:
        if candidate.prev_candidate_id is None:
            continue
        prev = by_id.get(candidate.prev_candidate_id)
        if prev is None:
            raise CorpusFormatError(
                f"{path}: candidate {candidate.id!r}: dangling prev link "
                f"{candidate.prev_candidate_id!r}"
            )
        if prev.doc_id != candidate.doc_id or prev.position != candidate.position - 1:
            raise CorpusFormatError(
                f"{path}: candidate {candidate.id!r}: prev link must point to the "
                f"preceding sentence of the same document"
            )
    return candidates


def load_judgments(path) -> list[Judgment]:
    """Read graded judgments; each pair needs at least one 1..5 score."""
    judgments = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            where = f"{path}: line {lineno}"
            qid, cid, source_text, en_text = _fields(line, 4, where)
            source_score = _parse_score(source_text, where)
            en_score = _parse_score(en_text, where)
            if source_score is None and en_score is None:
                raise CorpusFormatError(f"{where}: no score present")
            if (qid, cid) in seen:
                raise CorpusFormatError(f"{where}: duplicate judgment for ({qid}, {cid})")
            seen.add((qid, cid))
            judgments.append(Judgment(qid, cid, source_score, en_score))
    return judgments


def _parse_score(text: str, where: str) -> int | None:
    if text == MISSING:
        return None
    try:
        score = int(text)
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: bad score {text!r}") from exc
    if not 1 <= score <= 5:
        raise CorpusFormatError(f"{where}: score {score} outside 1..5")
    return score


def index_candidates(candidates: Iterable[Candidate]) -> dict[str, Candidate]:
    return {c.id: c for c in candidates}


def previous_candidate(
    candidate: Candidate, by_id: Mapping[str, Candidate]
) -> Candidate | None:
    if candidate.prev_candidate_id is None:
        return None
    return by_id[candidate.prev_candidate_id]


def write_questions(questions: Iterable[Question], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for question in questions:
            handle.write(f"{question.id}\t{question.raw_text}\n")


def write_corpus(candidates: Iterable[Candidate], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for c in candidates:
            onebest = MISSING if c.language == "en" else " ".join(c.onebest_en_tokens)
            prev = c.prev_candidate_id if c.prev_candidate_id is not None else MISSING
            handle.write(
                f"{c.id}\t{c.doc_id}\t{c.language}\t{c.position}\t"
                f"{' '.join(c.tokens)}\t{onebest}\t{prev}\n"
            )


def write_judgments(judgments: Iterable[Judgment], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for j in judgments:
            source = MISSING if j.source_score is None else str(j.source_score)
            en = MISSING if j.en_score is None else str(j.en_score)
            handle.write(f"{j.question_id}\t{j.candidate_id}\t{source}\t{en}\n")
