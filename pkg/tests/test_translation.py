import random
from collections import Counter

import pytest

from mlqarank.translation import (
    AlignedSentencePair,
    FILLER_TOKEN,
    GrammarRule,
    NBestDerivation,
    build_grammar_table,
    build_nbest_table,
    build_word_table,
    mask_contexts,
    probabilistic_query_from_table,
    read_aligned_corpus,
    read_grammar,
    read_nbest,
    read_translation_table,
    term_distribution,
    validate_distribution,
    write_aligned_corpus,
    write_grammar,
    write_nbest,
    write_translation_table,
)

# ---------------------------------------------------------------------------
# Independent brute-force oracles. They enumerate flat contribution lists
# and aggregate by scanning, instead of streaming accumulation. Random
# instances use integer likelihoods so float sums are exact in any order.
# ---------------------------------------------------------------------------


def oracle_word_table(pairs, normalize=True):
    occurrences = [tok for p in pairs for tok in p.source_tokens]
    links = [(p.source_tokens[i], p.target_tokens[j]) for p in pairs for i, j in sorted(p.links)]
    table = {}
    for word in sorted(set(occurrences)):
        targets = sorted({t for s, t in links if s == word})
        if not targets:
            table[word] = {}
            continue
        k = {t: links.count((word, t)) for t in targets}
        denominator = sum(k.values()) if normalize else occurrences.count(word)
        table[word] = {t: k[t] / denominator for t in targets}
    return table


def oracle_grammar(rules, terms):
    applicable = [r for r in rules if set(r.source_tokens) <= set(terms)]
    dists = []
    for term in terms:
        contributions = [
            (r.target_tokens[j], r.likelihood)
            for r in applicable
            for i, j in sorted(r.alignments)
            if r.source_tokens[i] == term
        ]
        targets = sorted({t for t, _ in contributions})
        mass = {t: sum(l for tt, l in contributions if tt == t) for t in targets}
        total = sum(mass.values())
        dists.append({t: mass[t] / total for t in targets} if total > 0 else {})
    return dists


def oracle_nbest(derivations, terms):
    hits = [
        (term, r.target_tokens[j])
        for term in set(terms)
        for d in derivations
        for r in d.rules
        for i, j in sorted(r.alignments)
        if r.source_tokens[i] == term
    ]
    dists = []
    for term in terms:
        targets = sorted({t for s, t in hits if s == term})
        counts = {t: hits.count((term, t)) for t in targets}
        total = sum(counts.values())
        dists.append({t: counts[t] / total for t in targets} if total > 0 else {})
    return dists


def rule(source, target, links, likelihood):
    return GrammarRule(tuple(source.split()), tuple(target.split()), frozenset(links), likelihood)


class TestWordTable:
    def test_link_ratios(self):
        # "dog" appears 4 times: 3 links to t1, 1 to t2
        pairs = [
            AlignedSentencePair(("dog",), ("t1",), frozenset({(0, 0)})),
            AlignedSentencePair(("dog",), ("t1",), frozenset({(0, 0)})),
            AlignedSentencePair(("dog",), ("t1",), frozenset({(0, 0)})),
            AlignedSentencePair(("dog",), ("t2",), frozenset({(0, 0)})),
        ]
        assert build_word_table(pairs)["dog"] == {"t1": 0.75, "t2": 0.25}

    def test_unlinked_word_empty(self):
        pairs = [
            AlignedSentencePair(("cat",), ("x",), frozenset()),
            AlignedSentencePair(("cat",), ("y",), frozenset()),
        ]
        assert build_word_table(pairs)["cat"] == {}

    def test_raw_mass_is_linked_share(self):
        # 1 of 2 occurrences linked: raw sums to 1/2, normalized to 1
        pairs = [
            AlignedSentencePair(("dog",), ("t1",), frozenset({(0, 0)})),
            AlignedSentencePair(("dog",), ("t1",), frozenset()),
        ]
        assert build_word_table(pairs, normalize=False)["dog"] == {"t1": 0.5}
        assert build_word_table(pairs)["dog"] == {"t1": 1.0}

    def test_toy_corpus_matches_oracle(self):
        rng = random.Random(17)
        source_vocab = [f"s{i}" for i in range(6)]
        target_vocab = [f"t{i}" for i in range(6)]
        pairs = []
        for _ in range(10):
            src = tuple(rng.choice(source_vocab) for _ in range(rng.randrange(1, 5)))
            tgt = tuple(rng.choice(target_vocab) for _ in range(rng.randrange(1, 5)))
            links = {
                (rng.randrange(len(src)), rng.randrange(len(tgt)))
                for _ in range(rng.randrange(0, 5))
            }
            pairs.append(AlignedSentencePair(src, tgt, frozenset(links)))
        assert build_word_table(pairs) == oracle_word_table(pairs)
        assert build_word_table(pairs, normalize=False) == oracle_word_table(pairs, normalize=False)

    def test_raw_sum_bounded_with_function_alignments(self):
        # at most one link per source occurrence: raw mass = linked/m <= 1
        rng = random.Random(3)
        for _ in range(100):
            pairs = []
            occurrences = Counter()
            linked = Counter()
            for _ in range(rng.randrange(1, 8)):
                src = tuple(f"s{rng.randrange(5)}" for _ in range(rng.randrange(1, 5)))
                tgt = tuple(f"t{rng.randrange(5)}" for _ in range(rng.randrange(1, 4)))
                links = set()
                for i in range(len(src)):
                    if rng.random() < 0.7:
                        links.add((i, rng.randrange(len(tgt))))
                        linked[src[i]] += 1
                occurrences.update(src)
                pairs.append(AlignedSentencePair(src, tgt, frozenset(links)))
            raw = build_word_table(pairs, normalize=False)
            for word, dist in raw.items():
                assert sum(dist.values()) == pytest.approx(
                    linked[word] / occurrences[word], abs=1e-12
                )
                assert sum(dist.values()) <= 1 + 1e-9

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_word_table([])


class TestGrammarTable:
    def test_single_rule_normalizes_to_one(self):
        pq = build_grammar_table([rule("child", "X", {(0, 0)}, 0.5)], ["child"])
        assert pq.term_distributions[0] == {"X": 1.0}

    def test_two_rules_share_mass(self):
        rules = [rule("child", "X", {(0, 0)}, 0.3), rule("child", "Y", {(0, 0)}, 0.1)]
        dist = build_grammar_table(rules, ["child"]).term_distributions[0]
        assert dist == pytest.approx({"X": 0.75, "Y": 0.25}, abs=1e-12)

    def test_multiword_rule_matches_oracle(self):
        rules = [
            rule("child", "X", {(0, 0)}, 0.3),
            rule("child", "Y", {(0, 0)}, 0.1),
            rule("child labor", "A B", {(0, 0), (1, 1)}, 0.2),
        ]
        terms = ["child", "labor", "africa"]
        pq = build_grammar_table(rules, terms)
        assert list(pq.term_distributions) == oracle_grammar(rules, terms)
        # the africa term matches no rule
        assert pq.term_distributions[2] == {}

    def test_inapplicable_rule_ignored(self):
        rules = [
            rule("child care", "X Z", {(0, 0), (1, 1)}, 5.0),
            rule("child", "Y", {(0, 0)}, 1.0),
        ]
        dist = build_grammar_table(rules, ["child", "labor"]).term_distributions[0]
        assert dist == {"Y": 1.0}

    def test_likelihood_scale_invariance(self):
        rng = random.Random(23)
        rules = [
            rule(f"s{rng.randrange(4)}", f"t{rng.randrange(4)}", {(0, 0)}, float(rng.randrange(1, 9)))
            for _ in range(8)
        ]
        terms = ["s0", "s1", "s2"]
        base = build_grammar_table(rules, terms)
        doubled = [
            GrammarRule(r.source_tokens, r.target_tokens, r.alignments, r.likelihood * 2.0)
            for r in rules
        ]
        # powers of two leave mantissas untouched: bitwise identical output
        assert build_grammar_table(doubled, terms) == base
        scaled = [
            GrammarRule(r.source_tokens, r.target_tokens, r.alignments, r.likelihood * 3.7)
            for r in rules
        ]
        for got, want in zip(build_grammar_table(scaled, terms).term_distributions,
                             base.term_distributions):
            assert got == pytest.approx(want, abs=1e-12)


class TestNBestTable:
    @staticmethod
    def _derivation(rank, mapping):
        rules = [rule(src, tgt, {(0, 0)}, 1.0) for src, tgt in mapping]
        return NBestDerivation(rank, tuple(rules))

    def test_unanimous_alignment(self):
        derivations = [self._derivation(r, [("africa", "AF")]) for r in range(1, 11)]
        pq = build_nbest_table(derivations, ["africa"])
        assert pq.term_distributions[0] == {"AF": 1.0}

    def test_split_counts(self):
        derivations = [
            self._derivation(r, [("labor", "A" if r <= 6 else "B")]) for r in range(1, 11)
        ]
        dist = build_nbest_table(derivations, ["labor"]).term_distributions[0]
        assert dist == {"A": 0.6, "B": 0.4}

    def test_three_derivations_match_oracle(self):
        derivations = [
            self._derivation(1, [("child", "X"), ("labor", "A")]),
            self._derivation(2, [("child", "Y"), ("labor", "A")]),
            self._derivation(3, [("child", "X"), ("labor", "B")]),
        ]
        terms = ["child", "labor"]
        pq = build_nbest_table(derivations, terms)
        assert list(pq.term_distributions) == oracle_nbest(derivations, terms)

    def test_duplicate_rank_rejected(self):
        derivations = [self._derivation(1, [("a", "x")]), self._derivation(1, [("a", "y")])]
        with pytest.raises(ValueError, match="rank"):
            build_nbest_table(derivations, ["a"])


def test_builder_oracle_equivalence_randomized():
    rng = random.Random(41)
    terms_pool = [f"s{i}" for i in range(5)]
    for _ in range(100):
        n_rules = rng.randrange(1, 6)
        rules = []
        for _ in range(n_rules):
            width = rng.randrange(1, 3)
            src = tuple(rng.choice(terms_pool) for _ in range(width))
            tgt = tuple(f"t{rng.randrange(6)}" for _ in range(rng.randrange(1, 3)))
            links = {
                (rng.randrange(len(src)), rng.randrange(len(tgt)))
                for _ in range(rng.randrange(1, 4))
            }
            rules.append(GrammarRule(src, tgt, frozenset(links), float(rng.randrange(1, 10))))
        terms = [rng.choice(terms_pool) for _ in range(rng.randrange(1, 4))]
        assert list(build_grammar_table(rules, terms).term_distributions) == oracle_grammar(
            rules, terms
        )
        derivations = [
            NBestDerivation(rank, tuple(rng.sample(rules, rng.randrange(1, len(rules) + 1))))
            for rank in range(1, rng.randrange(2, 6))
        ]
        assert list(build_nbest_table(derivations, terms).term_distributions) == oracle_nbest(
            derivations, terms
        )


def test_builder_distributions_normalized_randomized():
    rng = random.Random(8)
    for _ in range(200):
        rules = [
            rule(f"s{rng.randrange(4)}", f"t{rng.randrange(5)}", {(0, 0)}, float(rng.randrange(1, 7)))
            for _ in range(rng.randrange(1, 7))
        ]
        terms = [f"s{rng.randrange(4)}" for _ in range(rng.randrange(1, 4))]
        for dist in build_grammar_table(rules, terms).term_distributions:
            validate_distribution(dist)
            if dist:
                assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


class TestTermDistribution:
    def test_known_term(self):
        table = {"dog": {"t1": 1.0}}
        assert term_distribution(table, "dog") == {"t1": 1.0}

    def test_oov_term(self):
        assert term_distribution({"dog": {"t1": 1.0}}, "cat") == {}

    def test_empty_table(self):
        assert term_distribution({}, "anything") == {}

    def test_query_assembly_keeps_term_slots(self):
        pq = probabilistic_query_from_table({"a": {"x": 1.0}}, ["a", "oov"])
        assert len(pq.term_distributions) == 2
        assert pq.term_distributions[1] == {}


class TestMaskContexts:
    TOKENS = ["fue", "un", "placer", "conocerte", "y"]

    def test_window_two_patterns(self):
        samples = mask_contexts(self.TOKENS, 2, 2, 100, seed=1)
        assert ["fue", "un", "placer", FILLER_TOKEN, "y"] in samples
        assert [FILLER_TOKEN, FILLER_TOKEN, "placer", "conocerte", "y"] in samples
        # 4 context positions -> 15 possible nonempty masks
        assert len(samples) == 15

    def test_window_zero_empty(self):
        assert mask_contexts(self.TOKENS, 2, 0, 10, seed=1) == []

    def test_all_subsets_when_few(self):
        samples = mask_contexts(["a", "b", "c"], 0, 2, 10, seed=1)
        assert len(samples) == 3  # 2 context positions -> 2^2 - 1

    def test_focus_never_masked_and_distinct(self):
        rng = random.Random(2)
        for _ in range(100):
            length = rng.randrange(1, 9)
            tokens = [f"tok{i}" for i in range(length)]
            focus = rng.randrange(length)
            samples = mask_contexts(tokens, focus, rng.randrange(0, 4), rng.randrange(1, 12), seed=rng.randrange(99))
            seen = set()
            for sample in samples:
                assert sample[focus] == tokens[focus]
                assert FILLER_TOKEN in sample
                key = tuple(sample)
                assert key not in seen
                seen.add(key)

    def test_seed_determinism_and_cap(self):
        a = mask_contexts(self.TOKENS, 2, 2, 5, seed=42)
        b = mask_contexts(self.TOKENS, 2, 2, 5, seed=42)
        c = mask_contexts(self.TOKENS, 2, 2, 5, seed=43)
        assert a == b
        assert len(a) == 5
        assert a != c

    def test_focus_out_of_range(self):
        with pytest.raises(ValueError):
            mask_contexts(self.TOKENS, 9, 2, 5, seed=0)

    def test_wide_windows_still_sample(self):
        tokens = [f"t{i}" for i in range(80)]
        samples = mask_contexts(tokens, 40, 79, 6, seed=5)
        assert len(samples) == 6
        assert samples == mask_contexts(tokens, 40, 79, 6, seed=5)
        assert len({tuple(s) for s in samples}) == 6


class TestFileFormats:
    def test_grammar_roundtrip(self, tmp_path):
        rules = [
            rule("child labor", "A B", {(0, 0), (1, 1)}, 0.2),
            rule("africa", "AF", {(0, 0)}, 1.5),
        ]
        path = tmp_path / "grammar.tsv"
        write_grammar(rules, path)
        assert read_grammar(path) == rules

    def test_grammar_bad_fields(self, tmp_path):
        path = tmp_path / "grammar.tsv"
        path.write_text("child ||| X ||| 0-0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="4"):
            read_grammar(path)

    def test_table_roundtrip(self, tmp_path):
        table = {"dog": {"t1": 0.75, "t2": 0.25}, "cat": {}}
        path = tmp_path / "table.tsv"
        write_translation_table(table, path)
        loaded = read_translation_table(path)
        # empty distributions have no rows to carry them
        assert loaded == {"dog": {"t1": 0.75, "t2": 0.25}}

    def test_table_rejects_oversum(self, tmp_path):
        path = tmp_path / "table.tsv"
        path.write_text("w\ta\t0.8\nw\tb\t0.4\n", encoding="utf-8")
        with pytest.raises(ValueError, match="sum"):
            read_translation_table(path)

    def test_nbest_roundtrip(self, tmp_path):
        derivations = {
            "q1": [
                NBestDerivation(1, (rule("a", "x", {(0, 0)}, 2.0),)),
                NBestDerivation(2, (rule("a", "y", {(0, 0)}, 1.0),)),
            ]
        }
        path = tmp_path / "nbest.tsv"
        write_nbest(derivations, path)
        assert read_nbest(path) == derivations

    def test_aligned_corpus_roundtrip(self, tmp_path):
        pairs = [
            AlignedSentencePair(("a", "b"), ("x",), frozenset({(0, 0), (1, 0)})),
            AlignedSentencePair(("c",), ("y", "z"), frozenset()),
        ]
        path = tmp_path / "aligned.tsv"
        write_aligned_corpus(pairs, path)
        assert read_aligned_corpus(path) == pairs

    def test_aligned_corpus_bad_link(self, tmp_path):
        path = tmp_path / "aligned.tsv"
        path.write_text("a b\tx\t5-0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="out of range"):
            read_aligned_corpus(path)
