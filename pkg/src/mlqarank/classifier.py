"""Binary relevance classification with a balanced-subset ensemble.

Retrieval-style training data is heavily skewed toward negatives, so the
negatives are partitioned into near-equal slices; each slice plus every
positive forms one balanced subset, and one L2-regularized logistic
model is fit per subset by deterministic full-batch gradient ascent with
a backtracking step size. Classification takes a majority vote across
members; ranking uses the mean member probability, which gives a total
order the vote cannot.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .features import FEATURE_NAMES, FeatureVector


@dataclass(frozen=True)
class TrainingExample:
    features: FeatureVector
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class TrainConfig:
    l2: float = 1.0
    seed: int = 0
    tol: float = 1e-6
    max_iter: int = 1000


@dataclass(frozen=True)
class EnsembleMember:
    bias: float
    weights: tuple[float, ...]


@dataclass(frozen=True)
class EnsembleModel:
    members: tuple[EnsembleMember, ...]
    feature_names: tuple[str, ...]
    active: tuple[bool, ...]
    l2: float
    seed: int

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        dim = len(self.feature_names)
        for member in self.members:
            if len(member.weights) != dim:
                raise ValueError("ensemble members disagree on dimensionality")


def partition_balanced(
    examples: Sequence[TrainingExample], seed: int
) -> list[list[TrainingExample]]:
    """Split skewed data into ceil(#neg/#pos) subsets sharing all positives.

    Negatives are shuffled with the given seed and partitioned disjointly
    into near-equal slices (sizes differ by at most one).
    """
    positives = [e for e in examples if e.label == 1]
    negatives = [e for e in examples if e.label == 0]
    if not positives:
        raise ValueError("no positive examples")
    if not negatives:
        raise ValueError("no negative examples")
    n_subsets = math.ceil(len(negatives) / len(positives))
    shuffled = list(negatives)
    random.Random(seed).shuffle(shuffled)
    base, extra = divmod(len(shuffled), n_subsets)
    subsets = []
    start = 0
    for i in range(n_subsets):
        size = base + (1 if i < extra else 0)
        subsets.append(list(positives) + shuffled[start : start + size])
        start += size
    return subsets


def penalized_loglik(
    weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, l2: float
) -> float:
    """L2-penalized Bernoulli log-likelihood; the bias is not penalized."""
    z = x @ weights + bias
    ll = -np.logaddexp(0.0, -z) @ y - np.logaddexp(0.0, z) @ (1.0 - y)
    return float(ll - 0.5 * l2 * weights @ weights)


def loglik_gradient(
    weights: np.ndarray, bias: float, x: np.ndarray, y: np.ndarray, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`penalized_loglik` w.r.t. weights and bias."""
    z = x @ weights + bias
    residual = y - 0.5 * (1.0 + np.tanh(0.5 * z))
    return x.T @ residual - l2 * weights, float(residual.sum())


def _fit_member(x: np.ndarray, y: np.ndarray, config: TrainConfig) -> tuple[float, np.ndarray]:
    dim = x.shape[1]
    weights = np.zeros(dim)
    bias = 0.0
    step = 1.0
    for _ in range(config.max_iter):
        grad_w, grad_b = loglik_gradient(weights, bias, x, y, config.l2)
        grad_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if math.sqrt(grad_sq) <= config.tol:
            break
        value = penalized_loglik(weights, bias, x, y, config.l2)
        while True:
            cand_w = weights + step * grad_w
            cand_b = bias + step * grad_b
            if penalized_loglik(cand_w, cand_b, x, y, config.l2) >= value + 1e-4 * step * grad_sq:
                break
            step *= 0.5
            if step <= 1e-14:
                return bias, weights
        weights, bias = cand_w, cand_b
        step = min(step * 2.0, 1e6)
    return bias, weights


def train_ensemble(
    examples: Sequence[TrainingExample], config: TrainConfig = TrainConfig()
) -> EnsembleModel:
    """Fit one logistic member per balanced subset.

    Inactive features are excluded from the optimization and carry zero
    weight in the returned members. Training is bit-for-bit reproducible
    for a fixed seed.
    """
    if not examples:
        raise ValueError("no training examples")
    mask = examples[0].features.active
    for example in examples:
        if example.features.active != mask:
            raise ValueError("examples disagree on the active-feature mask")
        for value in example.features.values:
            if not math.isfinite(value):
                raise ValueError("non-finite feature value")
    active_idx = [i for i, on in enumerate(mask) if on]
    members = []
    for subset in partition_balanced(examples, config.seed):
        x = np.array([[e.features.values[i] for i in active_idx] for e in subset])
        y = np.array([float(e.label) for e in subset])
        bias, packed = _fit_member(x, y, config)
        weights = [0.0] * len(FEATURE_NAMES)
        for slot, i in enumerate(active_idx):
            weights[i] = float(packed[slot])
        members.append(EnsembleMember(bias, tuple(weights)))
    return EnsembleModel(tuple(members), FEATURE_NAMES, mask, config.l2, config.seed)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def member_probability(member: EnsembleMember, fv: FeatureVector) -> float:
    z = member.bias + sum(w * v for w, v in zip(member.weights, fv.values))
    return _sigmoid(z)


def score(model: EnsembleModel, fv: FeatureVector) -> float:
    """Mean member probability of relevance; the ranking score."""
    if len(fv.values) != len(model.feature_names):
        raise ValueError("dimensionality mismatch")
    probs = [member_probability(m, fv) for m in model.members]
    return sum(probs) / len(probs)


def predict(model: EnsembleModel, fv: FeatureVector) -> bool:
    """Majority vote at probability 0.5; even ties fall back to the mean."""
    if len(fv.values) != len(model.feature_names):
        raise ValueError("dimensionality mismatch")
    probs = [member_probability(m, fv) for m in model.members]
    votes = sum(1 for p in probs if p >= 0.5)
    against = len(probs) - votes
    if votes != against:
        return votes > against
    return sum(probs) / len(probs) >= 0.5


def write_model(model: EnsembleModel, path) -> None:
    """Header lines (#features, #active, #l2, #seed), then one member per line."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("#features\t" + "\t".join(model.feature_names) + "\n")
        handle.write("#active\t" + "\t".join("1" if a else "0" for a in model.active) + "\n")
        handle.write(f"#l2\t{model.l2!r}\n")
        handle.write(f"#seed\t{model.seed}\n")
        for member in model.members:
            weights = "\t".join(repr(w) for w in member.weights)
            handle.write(f"{member.bias!r}\t{weights}\n")


def read_model(path) -> EnsembleModel:
    feature_names: tuple[str, ...] | None = None
    active: tuple[bool, ...] | None = None
    l2 = 1.0
    seed = 0
    members = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if line.startswith("#"):
                key = fields[0]
                if key == "#features":
                    feature_names = tuple(fields[1:])
                elif key == "#active":
                    active = tuple(v == "1" for v in fields[1:])
                elif key == "#l2":
                    l2 = float(fields[1])
                elif key == "#seed":
                    seed = int(fields[1])
                else:
                    raise ValueError(f"{path}:{lineno}: unknown header {key!r}")
                continue
            members.append(EnsembleMember(float(fields[0]), tuple(float(w) for w in fields[1:])))
    if feature_names is None:
        raise ValueError(f"{path}: missing #features header")
    if active is None:
        active = (True,) * len(feature_names)
    return EnsembleModel(tuple(members), feature_names, active, l2, seed)
