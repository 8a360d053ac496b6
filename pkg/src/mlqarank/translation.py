"""Per-term probabilistic translation tables and their data files.

Translation distributions arrive from four kinds of resources: word
alignment corpora, weighted rewrite-rule grammars, n-best derivation
lists, and pre-built context tables. Builders here turn the first three
into per-word (or per-question-term) probability distributions; context
tables are ingested as-is. This module also generates the masked-context
training samples used to prepare data for an external context-sensitive
translation trainer.
"""

from __future__ import annotations

import random
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

Distribution = dict[str, float]

FILLER_TOKEN = "<F>"

RULE_FIELD_SEP = " ||| "

# Sum tolerance for probability distributions.
SUM_EPS = 1e-9


def validate_distribution(dist: Mapping[str, float], context: str = "distribution") -> None:
    """Check the invariants every translation distribution must satisfy."""
    total = 0.0
    for word, prob in dist.items():
        if not prob > 0.0:
            raise ValueError(f"{context}: non-positive probability {prob!r} for {word!r}")
        total += prob
    if total > 1.0 + SUM_EPS:
        raise ValueError(f"{context}: probabilities sum to {total!r} > 1")


@dataclass(frozen=True)
class ProbabilisticQuery:
    """One translation distribution per question term, in term order."""

    term_distributions: tuple[Distribution, ...]

    def __post_init__(self) -> None:
        for i, dist in enumerate(self.term_distributions):
            validate_distribution(dist, context=f"term {i}")


@dataclass(frozen=True)
class GrammarRule:
    """A weighted rewrite rule with word alignments between its two sides."""

    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    alignments: frozenset[tuple[int, int]]
    likelihood: float

    def __post_init__(self) -> None:
        if self.likelihood < 0.0:
            raise ValueError(f"negative rule likelihood {self.likelihood!r}")
        for i, j in self.alignments:
            if not (0 <= i < len(self.source_tokens) and 0 <= j < len(self.target_tokens)):
                raise ValueError(f"alignment ({i},{j}) out of range for rule {self}")


@dataclass(frozen=True)
class NBestDerivation:
    """One entry of an n-best translation list: its rank and the rules used."""

    rank: int
    rules: tuple[GrammarRule, ...]


@dataclass(frozen=True)
class AlignedSentencePair:
    """A sentence pair with a many-to-many word-alignment link set."""

    source_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    links: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for i, j in self.links:
            if not (0 <= i < len(self.source_tokens) and 0 <= j < len(self.target_tokens)):
                raise ValueError(f"alignment link ({i},{j}) out of range")


def _normalized(counts: Mapping[str, float], total: float) -> Distribution:
    return {word: counts[word] / total for word in sorted(counts)}


def build_word_table(
    corpus: Sequence[AlignedSentencePair], normalize: bool = True
) -> dict[str, Distribution]:
    """Derive word translation probabilities from alignment links.

    For a source word with m corpus occurrences and k alignment links to a
    given target word, the raw entry is k/m (``normalize=False``); each
    link of a many-to-many alignment counts once. By default every
    nonempty distribution is then rescaled to sum to one. Source words
    with no links at all map to an empty distribution.
    """
    if not corpus:
        raise ValueError("empty alignment corpus")
    occurrences: Counter[str] = Counter()
    links: dict[str, Counter[str]] = {}
    for pair in corpus:
        occurrences.update(pair.source_tokens)
        for i, j in sorted(pair.links):
            source = pair.source_tokens[i]
            links.setdefault(source, Counter())[pair.target_tokens[j]] += 1
    table: dict[str, Distribution] = {}
    for word in sorted(occurrences):
        word_links = links.get(word)
        if not word_links:
            table[word] = {}
        elif normalize:
            table[word] = _normalized(word_links, float(sum(word_links.values())))
        else:
            table[word] = _normalized(word_links, float(occurrences[word]))
    return table


def rule_applies(rule: GrammarRule, terms: Sequence[str]) -> bool:
    """A rule applies when all its source tokens occur among the terms."""
    return set(rule.source_tokens) <= set(terms)


def build_grammar_table(
    rules: Iterable[GrammarRule], terms: Sequence[str]
) -> ProbabilisticQuery:
    """Accumulate rule likelihoods into per-term translation distributions.

    For every applicable rule and every alignment link that maps a
    question term to a target word, the rule's likelihood is added to that
    target word's mass; each term's distribution is then normalized to sum
    to one. Terms matched by no rule get an empty distribution.
    """
    if not terms:
        raise ValueError("question has no terms")
    applicable = [r for r in rules if rule_applies(r, terms)]
    dists = []
    for term in terms:
        mass: dict[str, float] = {}
        for rule in applicable:
            for i, j in sorted(rule.alignments):
                if rule.source_tokens[i] == term:
                    target = rule.target_tokens[j]
                    mass[target] = mass.get(target, 0.0) + rule.likelihood
        mass = {t: m for t, m in mass.items() if m > 0.0}
        if mass:
            total = sum(mass[t] for t in sorted(mass))
            dists.append(_normalized(mass, total))
        else:
            dists.append({})
    return ProbabilisticQuery(tuple(dists))


def build_nbest_table(
    derivations: Sequence[NBestDerivation], terms: Sequence[str]
) -> ProbabilisticQuery:
    """Count aligned target words across n-best derivations, per term.

    Every (derivation, rule, alignment link) occurrence counts once, so
    derivations are weighted uniformly regardless of rank. Counts are
    normalized per term.
    """
    if not derivations:
        raise ValueError("empty derivation list")
    if not terms:
        raise ValueError("question has no terms")
    ranks = [d.rank for d in derivations]
    if len(set(ranks)) != len(ranks):
        raise ValueError("duplicate derivation rank")
    dists = []
    for term in terms:
        counts: Counter[str] = Counter()
        for derivation in derivations:
            for rule in derivation.rules:
                for i, j in sorted(rule.alignments):
                    if rule.source_tokens[i] == term:
                        counts[rule.target_tokens[j]] += 1
        if counts:
            dists.append(_normalized(counts, float(sum(counts.values()))))
        else:
            dists.append({})
    return ProbabilisticQuery(tuple(dists))


def term_distribution(table: Mapping[str, Distribution], term: str) -> Distribution:
    """Table lookup with out-of-vocabulary terms mapping to empty."""
    return table.get(term, {})


def probabilistic_query_from_table(
    table: Mapping[str, Distribution], terms: Sequence[str]
) -> ProbabilisticQuery:
    """Assemble a per-term query structure from a word-keyed table."""
    if not terms:
        raise ValueError("question has no terms")
    return ProbabilisticQuery(tuple(term_distribution(table, t) for t in terms))


def mask_contexts(
    tokens: Sequence[str],
    focus_index: int,
    window: int,
    sample_count: int,
    seed: int,
) -> list[list[str]]:
    """Generate context-masked variants of a sentence around a focus word.

    Context positions are the tokens within ``window`` of the focus
    (excluding the focus itself). Each sample replaces one distinct
    nonempty subset of those positions with the filler token. When more
    than ``sample_count`` subsets exist, a seeded random sample is drawn;
    otherwise all subsets are returned. Output order follows the subset
    bitmask over context positions, nearest-first, so it is deterministic.
    """
    toks = list(tokens)
    if not 0 <= focus_index < len(toks):
        raise ValueError(f"focus index {focus_index} out of range")
    if window < 0:
        raise ValueError("window must be >= 0")
    context = [
        i
        for i in range(max(0, focus_index - window), min(len(toks), focus_index + window + 1))
        if i != focus_index
    ]
    n_context = len(context)
    if n_context == 0 or sample_count <= 0:
        return []
    n_subsets = (1 << n_context) - 1
    if n_subsets <= sample_count:
        masks = list(range(1, n_subsets + 1))
    elif n_context <= 62:
        rng = random.Random(seed)
        masks = sorted(rng.sample(range(1, n_subsets + 1), sample_count))
    else:
        # range() cannot span 2^63; draw distinct masks directly
        rng = random.Random(seed)
        chosen: set[int] = set()
        while len(chosen) < sample_count:
            mask = rng.getrandbits(n_context)
            if mask:
                chosen.add(mask)
        masks = sorted(chosen)
    samples = []
    for mask in masks:
        masked = toks.copy()
        for bit, position in enumerate(context):
            if mask >> bit & 1:
                masked[position] = FILLER_TOKEN
        samples.append(masked)
    return samples


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _parse_rule(text: str, where: str) -> GrammarRule:
    parts = text.split("|||")
    if len(parts) != 4:
        raise ValueError(f"{where}: expected 4 '|||'-separated rule fields, got {len(parts)}")
    source = tuple(parts[0].split())
    target = tuple(parts[1].split())
    links = set()
    for pair in parts[2].split():
        try:
            i, j = pair.split("-")
            links.add((int(i), int(j)))
        except ValueError as exc:
            raise ValueError(f"{where}: bad alignment pair {pair!r}") from exc
    try:
        likelihood = float(parts[3])
    except ValueError as exc:
        raise ValueError(f"{where}: bad likelihood {parts[3]!r}") from exc
    if not source or not target:
        raise ValueError(f"{where}: rule sides must be nonempty")
    try:
        return GrammarRule(source, target, frozenset(links), likelihood)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from exc


def format_rule(rule: GrammarRule) -> str:
    pairs = " ".join(f"{i}-{j}" for i, j in sorted(rule.alignments))
    return RULE_FIELD_SEP.join(
        [" ".join(rule.source_tokens), " ".join(rule.target_tokens), pairs, repr(rule.likelihood)]
    )


def read_grammar(path) -> list[GrammarRule]:
    """Read a grammar file, one ``src ||| tgt ||| links ||| likelihood`` rule per line."""
    rules = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            rules.append(_parse_rule(line, f"{path}:{lineno}"))
    return rules


def write_grammar(rules: Iterable[GrammarRule], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for rule in rules:
            handle.write(format_rule(rule) + "\n")


def read_translation_table(path) -> dict[str, Distribution]:
    """Read a ``source<TAB>target<TAB>prob`` table file, grouping by source."""
    table: dict[str, Distribution] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            source, target, prob_text = fields
            try:
                prob = float(prob_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad probability {prob_text!r}") from exc
            dist = table.setdefault(source, {})
            if target in dist:
                raise ValueError(f"{path}:{lineno}: duplicate entry {source!r} -> {target!r}")
            dist[target] = prob
    for source, dist in table.items():
        validate_distribution(dist, context=f"{path}: {source!r}")
    return table


def write_translation_table(table: Mapping[str, Distribution], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for source in sorted(table):
            for target in sorted(table[source]):
                handle.write(f"{source}\t{target}\t{table[source][target]!r}\n")


def read_nbest(path) -> dict[str, list[NBestDerivation]]:
    """Read an n-best file: ``question_id<TAB>rank<TAB>rule`` lines, one rule per line."""
    grouped: dict[str, dict[int, list[GrammarRule]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            question_id, rank_text, rule_text = fields
            try:
                rank = int(rank_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad rank {rank_text!r}") from exc
            grouped.setdefault(question_id, {}).setdefault(rank, []).append(
                _parse_rule(rule_text, f"{path}:{lineno}")
            )
    return {
        qid: [NBestDerivation(rank, tuple(rules)) for rank, rules in sorted(by_rank.items())]
        for qid, by_rank in grouped.items()
    }


def write_nbest(derivations_by_question: Mapping[str, Sequence[NBestDerivation]], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for question_id in sorted(derivations_by_question):
            for derivation in derivations_by_question[question_id]:
                for rule in derivation.rules:
                    handle.write(f"{question_id}\t{derivation.rank}\t{format_rule(rule)}\n")


def read_aligned_corpus(path) -> list[AlignedSentencePair]:
    """Read ``source tokens<TAB>target tokens<TAB>i-j i-j ...`` sentence pairs."""
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            source = tuple(fields[0].split())
            target = tuple(fields[1].split())
            links = set()
            for pair in fields[2].split():
                try:
                    i, j = pair.split("-")
                    links.add((int(i), int(j)))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad alignment pair {pair!r}") from exc
            if not source or not target:
                raise ValueError(f"{path}:{lineno}: sentence sides must be nonempty")
            try:
                pairs.append(AlignedSentencePair(source, target, frozenset(links)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return pairs


def write_aligned_corpus(pairs: Iterable[AlignedSentencePair], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            links = " ".join(f"{i}-{j}" for i, j in sorted(pair.links))
            handle.write(f"{' '.join(pair.source_tokens)}\t{' '.join(pair.target_tokens)}\t{links}\n")
