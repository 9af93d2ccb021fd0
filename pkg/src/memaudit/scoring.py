"""Worst-case vulnerability scores and cross-seed aggregation.

Each attack vector yields a normalized score; a configuration's score is
the worst (largest) vector, a model's score is the worst configuration,
and seeds aggregate by arithmetic mean with the population standard
deviation (divisor n). Per-seed maxima are taken before averaging, so the
mean of per-seed maxima can exceed the max of per-vector means whenever
the dominant vector varies across seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

VECTOR_NAMES = ("ppl", "ext", "mia")


def s_ppl_from_means(mean_canary, mean_test):
    """Perplexity-gap score 1 - mean_canary / mean_test.

    Positive means canaries score better than held-out data; negative
    values are legal and preserved.
    """
    return 1.0 - mean_canary / mean_test


def s_mia_from_auc(auc):
    """Membership score max(0, 2*(AUC - 0.5)); chance level maps to 0."""
    return max(0.0, 2.0 * (auc - 0.5))


@dataclass(frozen=True)
class VectorScores:
    """One seed's normalized scores for the three attack vectors."""

    s_ppl: float
    s_ext: float
    s_mia: float

    def as_dict(self):
        return {"ppl": self.s_ppl, "ext": self.s_ext, "mia": self.s_mia}


def s_config(scores):
    """Worst-case vector score for one (model, dataset, seed) cell."""
    return max(scores.s_ppl, scores.s_ext, scores.s_mia)


def dominant_vector(scores):
    """Name of the vector attaining the max; first of ppl, ext, mia on ties."""
    best = s_config(scores)
    for name, value in scores.as_dict().items():
        if value == best:
            return name
    raise AssertionError("unreachable: max not among components")


def s_model(config_scores):
    """Worst configuration score across datasets for one seed."""
    values = list(config_scores)
    if not values:
        raise ValueError("need at least one configuration score")
    return max(values)


def aggregate_seeds(values):
    """Mean and population standard deviation (divisor n) across seeds."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("need at least one value")
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


@dataclass
class ConfigScore:
    """Per-seed worst-case scores for one dataset, with the aggregate."""

    dataset: str
    per_seed: dict  # seed -> S_config
    dominant: dict  # seed -> vector name
    mean: float
    std: float

    @classmethod
    def from_cells(cls, dataset, per_seed_scores, per_seed_dominant):
        mean, std = aggregate_seeds(list(per_seed_scores.values()))
        return cls(
            dataset=dataset,
            per_seed=dict(per_seed_scores),
            dominant=dict(per_seed_dominant),
            mean=mean,
            std=std,
        )


@dataclass
class ModelScore:
    """Per-seed worst dataset scores with the aggregate headline number."""

    per_seed: dict  # seed -> S_model
    mean: float
    std: float

    @classmethod
    def from_config_scores(cls, per_seed_config_scores):
        """per_seed_config_scores: seed -> list of S_config across datasets."""
        per_seed = {
            seed: s_model(scores) for seed, scores in per_seed_config_scores.items()
        }
        mean, std = aggregate_seeds(list(per_seed.values()))
        return cls(per_seed=per_seed, mean=mean, std=std)
