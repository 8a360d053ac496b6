"""Acceptance suite: one test per release criterion.

Each test prints a single ``[ACCEPTANCE] <name>: PASS/FAIL`` line (visible
with ``pytest -s``). Directional claims run on the committed fixtures
under tests/fixtures/, never on regenerated data.
"""

import functools
import random

import pytest

from mlqarank.classifier import TrainConfig, TrainingExample, train_ensemble
from mlqarank.data_selection import filter_subset, select_best_subset
from mlqarank.evaluation import ap_k, paired_permutation_test
from mlqarank.pipeline import RunConfig, run_pipeline
from mlqarank.ranking import (
    merge_alternate,
    merge_weighted,
    normalize_scores,
    ranked_list_from_scores,
    score_question_pool,
)
from mlqarank.translation import (
    AlignedSentencePair,
    GrammarRule,
    NBestDerivation,
    build_grammar_table,
    build_nbest_table,
    build_word_table,
)
from mlqarank.vectors import l1_norm, question_vector, sentence_vector

from conftest import fixture_paths
from test_evaluation import oracle_ap_k
from test_translation import oracle_grammar, oracle_nbest, oracle_word_table


def criterion(name):
    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")

        return inner

    return wrap


@criterion("1 question-vector weight reproduction")
def test_question_vector_weight():
    vec = question_vector([{"zh": 0.32}, {"zh": 0.36}, {}])
    assert vec["zh"] == pytest.approx(0.2267, abs=0.0005)


@criterion("2 normalization invariants (>=1000 randomized inputs)")
def test_normalization_invariants():
    rng = random.Random(1001)
    for _ in range(1000):
        tokens = [f"t{rng.randrange(12)}" for _ in range(rng.randrange(1, 40))]
        assert abs(l1_norm(sentence_vector(tokens)) - 1.0) <= 1e-9
        dists = []
        for _ in range(rng.randrange(1, 6)):
            words = [f"w{i}" for i in range(rng.randrange(1, 7))]
            raw = [rng.random() + 0.01 for _ in words]
            total = sum(raw)
            dists.append({w: x / total for w, x in zip(words, raw)})
        assert abs(l1_norm(question_vector(dists)) - 1.0) <= 1e-9
    checked = 0
    for trial in range(400):
        trial_rng = random.Random(trial)
        pairs = []
        for _ in range(trial_rng.randrange(1, 6)):
            src = tuple(f"s{trial_rng.randrange(5)}" for _ in range(trial_rng.randrange(1, 4)))
            tgt = tuple(f"t{trial_rng.randrange(5)}" for _ in range(trial_rng.randrange(1, 4)))
            links = {
                (trial_rng.randrange(len(src)), trial_rng.randrange(len(tgt)))
                for _ in range(trial_rng.randrange(0, 4))
            }
            pairs.append(AlignedSentencePair(src, tgt, frozenset(links)))
        for dist in build_word_table(pairs).values():
            if dist:
                assert abs(sum(dist.values()) - 1.0) <= 1e-9
                checked += 1
        rules = [
            GrammarRule(
                (f"s{trial_rng.randrange(5)}",),
                (f"t{trial_rng.randrange(5)}",),
                frozenset({(0, 0)}),
                float(trial_rng.randrange(1, 9)),
            )
            for _ in range(trial_rng.randrange(1, 5))
        ]
        terms = [f"s{i}" for i in range(5)]
        for dist in build_grammar_table(rules, terms).term_distributions:
            if dist:
                assert abs(sum(dist.values()) - 1.0) <= 1e-9
                checked += 1
        derivations = [
            NBestDerivation(rank, tuple(trial_rng.sample(rules, len(rules))))
            for rank in range(1, 4)
        ]
        for dist in build_nbest_table(derivations, terms).term_distributions:
            if dist:
                assert abs(sum(dist.values()) - 1.0) <= 1e-9
                checked += 1
    assert checked >= 1000


@criterion("3 brute-force oracle equivalence")
def test_oracle_equivalence():
    rng = random.Random(303)
    vocabulary = [f"s{i}" for i in range(5)]
    for _ in range(100):
        pairs = []
        for _ in range(rng.randrange(1, 6)):
            src = tuple(rng.choice(vocabulary) for _ in range(rng.randrange(1, 4)))
            tgt = tuple(f"t{rng.randrange(6)}" for _ in range(rng.randrange(1, 4)))
            links = {
                (rng.randrange(len(src)), rng.randrange(len(tgt)))
                for _ in range(rng.randrange(0, 5))
            }
            pairs.append(AlignedSentencePair(src, tgt, frozenset(links)))
        assert build_word_table(pairs) == oracle_word_table(pairs)

        rules = []
        for _ in range(rng.randrange(1, 6)):
            src = tuple(rng.choice(vocabulary) for _ in range(rng.randrange(1, 3)))
            tgt = tuple(f"t{rng.randrange(6)}" for _ in range(rng.randrange(1, 3)))
            links = {
                (rng.randrange(len(src)), rng.randrange(len(tgt)))
                for _ in range(rng.randrange(1, 4))
            }
            # integer likelihoods keep float sums exact in any order
            rules.append(GrammarRule(src, tgt, frozenset(links), float(rng.randrange(1, 10))))
        terms = [rng.choice(vocabulary) for _ in range(rng.randrange(1, 4))]
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

    for _ in range(1000):
        length = rng.randrange(0, 50)
        relevance = [rng.random() < 0.3 for _ in range(length)]
        total = sum(relevance) + rng.randrange(0, 6)
        k = rng.randrange(1, 30)
        assert ap_k(relevance, k, total) == oracle_ap_k(relevance, k, total)


@criterion("4 analytic gradient vs central finite differences")
def test_gradient_check():
    import numpy as np

    from mlqarank.classifier import loglik_gradient, penalized_loglik

    rng = np.random.default_rng(404)
    h = 1e-5
    for _ in range(20):
        n = int(rng.integers(2, 51))
        d = int(rng.integers(1, 11))
        x = rng.random((n, d))
        y = (rng.random(n) < 0.5).astype(float)
        w = rng.normal(size=d)
        b = float(rng.normal())
        l2 = float(rng.random() * 2)
        grad_w, grad_b = loglik_gradient(w, b, x, y, l2)
        numeric = np.zeros(d + 1)
        for j in range(d):
            bump = np.zeros(d)
            bump[j] = h
            numeric[j] = (
                penalized_loglik(w + bump, b, x, y, l2)
                - penalized_loglik(w - bump, b, x, y, l2)
            ) / (2 * h)
        numeric[d] = (
            penalized_loglik(w, b + h, x, y, l2) - penalized_loglik(w, b - h, x, y, l2)
        ) / (2 * h)
        analytic = np.concatenate([grad_w, [grad_b]])
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-12)
        assert rel < 1e-6


@criterion("5 probabilistic translation beats one-best ranking")
def test_probabilistic_beats_onebest(features_fixture_dir, tmp_path):
    paths_cl = fixture_paths(features_fixture_dir, tmp_path / "cl")
    paths_ql = fixture_paths(features_fixture_dir, tmp_path / "ql")
    config = dict(folds=4, seed=7, figures=False)
    full = run_pipeline(RunConfig(feature_set="cl", **config), paths_cl)
    onebest = run_pipeline(RunConfig(feature_set="ql", **config), paths_ql)
    questions = sorted(full.report.per_question)
    assert len(questions) >= 20
    gap = full.report.map_score - onebest.report.map_score
    assert gap >= 0.05, f"MAP gap {gap:.4f} below 0.05"
    p = paired_permutation_test(
        [full.report.per_question[q] for q in questions],
        [onebest.report.per_question[q] for q in questions],
        iterations=20000,
        seed=7,
    )
    assert p < 0.05, f"p-value {p:.4f} not significant"


@criterion("6 data selection prefers consistently-judged training data")
def test_data_selection_prefers_consist(selection_dataset):
    result = select_best_subset(
        ("consist", "en_plus", "all"),
        selection_dataset,
        folds=4,
        seed=9,
        config=TrainConfig(seed=9),
    )
    assert result.best in ("consist", "en_plus"), result.best
    assert result.cv_map[result.best] > result.cv_map["all"], result.cv_map


def _per_language_lists(dataset, seed=5):
    selected = filter_subset(dataset.judgments, dataset.candidates, "all")
    languages = sorted({c.language for c in dataset.candidates.values()})
    models = {}
    for language in languages:
        pairs = {
            pair: label
            for pair, label in selected.items()
            if dataset.candidates[pair[1]].language == language
        }
        examples = [TrainingExample(dataset.features[p], lab) for p, lab in pairs.items()]
        models[language] = train_ensemble(examples, TrainConfig(seed=seed))
    lists_by_question = {}
    for question in dataset.questions:
        lists = []
        for language in ("en", "ar", "ch"):
            scored = score_question_pool(dataset, models[language], question.id, language)
            if scored:
                ranked = ranked_list_from_scores(question.id, scored, len(scored), language)
                lists.append(normalize_scores(ranked))
        lists_by_question[question.id] = lists
    return lists_by_question


@criterion("7 merge behavior: monotone English share; alternate near-parity")
def test_merge_behavior(features_dataset):
    lists_by_question = _per_language_lists(features_dataset)
    shares = []
    for weight in (1.0, 2.0, 5.0, 10.0):
        english = 0
        total = 0
        for lists in lists_by_question.values():
            merged = merge_weighted(lists, 9, weight)
            english += sum(1 for e in merged.entries if e.language == "en")
            total += len(merged.entries)
        shares.append(100.0 * english / total)
    assert all(b >= a for a, b in zip(shares, shares[1:])), shares
    for lists in lists_by_question.values():
        merged = merge_alternate(lists, 9)
        counts = [
            sum(1 for e in merged.entries if e.language == lang) for lang in ("en", "ar", "ch")
        ]
        assert max(counts) - min(counts) <= 1, counts


@criterion("8 byte-identical reports across reruns")
def test_pipeline_determinism(features_fixture_dir, tmp_path):
    config = RunConfig(folds=4, seed=11, list_size=12)
    out_a = tmp_path / "first"
    out_b = tmp_path / "second"
    run_pipeline(config, fixture_paths(features_fixture_dir, out_a))
    run_pipeline(config, fixture_paths(features_fixture_dir, out_b))
    files_a = sorted(p.name for p in out_a.iterdir())
    files_b = sorted(p.name for p in out_b.iterdir())
    assert files_a == files_b and files_a
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
