import math
import random

import pytest

from mlqarank.vectors import (
    cosine,
    l1_norm,
    question_vector,
    sentence_vector,
    vector_to_tsv,
)


class TestQuestionVector:
    def test_average_across_terms(self):
        # a word appearing with 0.32, 0.36, and 0 across three terms
        vec = question_vector([{"X": 0.32}, {"X": 0.36}, {}])
        assert vec["X"] == pytest.approx(0.2267, abs=5e-4)

    def test_single_term_identity(self):
        assert question_vector([{"w": 1.0}]) == {"w": 1.0}

    def test_disjoint_terms_average(self):
        vec = question_vector([{"a": 1.0}, {"b": 1.0}, {"c": 1.0}])
        assert vec == pytest.approx({"a": 1 / 3, "b": 1 / 3, "c": 1 / 3})

    def test_zero_terms_error(self):
        with pytest.raises(ValueError):
            question_vector([])

    def test_permutation_invariant_in_term_order(self):
        rng = random.Random(5)
        for _ in range(50):
            dists = [
                {f"w{rng.randrange(8)}": rng.random() * 0.5 for _ in range(rng.randrange(4))}
                for _ in range(rng.randrange(1, 6))
            ]
            shuffled = list(dists)
            rng.shuffle(shuffled)
            base = question_vector(dists)
            other = question_vector(shuffled)
            assert base.keys() == other.keys()
            for word in base:
                assert base[word] == pytest.approx(other[word], abs=1e-12)


class TestSentenceVector:
    def test_relative_frequencies(self):
        assert sentence_vector(["a", "b", "a"]) == pytest.approx({"a": 2 / 3, "b": 1 / 3})

    def test_single_token(self):
        assert sentence_vector(["x"]) == {"x": 1.0}

    def test_empty_error(self):
        with pytest.raises(ValueError, match="empty sentence"):
            sentence_vector([])


class TestCosine:
    def test_identical_vectors(self):
        u = {"a": 0.4, "b": 0.6}
        assert cosine(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_supports(self):
        assert cosine({"a": 1.0}, {"b": 1.0}) == 0.0

    def test_partial_overlap(self):
        assert cosine({"a": 1.0}, {"a": 1.0, "b": 1.0}) == pytest.approx(1 / math.sqrt(2), abs=1e-9)

    def test_empty_vector_is_zero(self):
        assert cosine({}, {"a": 1.0}) == 0.0
        assert cosine({"a": 1.0}, {}) == 0.0
        assert cosine({}, {}) == 0.0


def _random_vector(rng, max_words=12):
    return {f"w{i}": rng.random() + 1e-6 for i in range(rng.randrange(1, max_words))}


def test_cosine_properties_randomized():
    rng = random.Random(99)
    for _ in range(300):
        u = _random_vector(rng)
        v = _random_vector(rng)
        c = cosine(u, v)
        assert 0.0 <= c <= 1.0
        assert cosine(v, u) == c
        scale = rng.random() * 10 + 0.1
        scaled = {w: x * scale for w, x in u.items()}
        assert cosine(scaled, v) == pytest.approx(c, abs=1e-9)


def test_l1_norms_randomized():
    rng = random.Random(4)
    for _ in range(1000):
        tokens = [f"t{rng.randrange(9)}" for _ in range(rng.randrange(1, 30))]
        assert l1_norm(sentence_vector(tokens)) == pytest.approx(1.0, abs=1e-9)
        # distributions that each sum to one keep unit mass after averaging
        n_terms = rng.randrange(1, 6)
        dists = []
        for _ in range(n_terms):
            words = [f"w{i}" for i in range(rng.randrange(1, 6))]
            raw = [rng.random() + 0.01 for _ in words]
            total = sum(raw)
            dists.append({w: x / total for w, x in zip(words, raw)})
        assert l1_norm(question_vector(dists)) == pytest.approx(1.0, abs=1e-9)


def test_vector_dump_sorted_by_weight():
    text = vector_to_tsv({"low": 0.1, "high": 0.8, "mid": 0.3})
    words = [line.split("\t")[0] for line in text.splitlines()]
    assert words == ["high", "mid", "low"]
