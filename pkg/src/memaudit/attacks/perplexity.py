"""Perplexity-gap detection: do planted canaries score anomalously well?

Per-sequence perplexity is exp(-log_prob / len). The table compares the
arithmetic mean perplexity of training data, held-out test data, and the
distinct canaries (each counted once regardless of how many copies were
planted). A trained-in canary set shows up as mean_canary < mean_test:

    gap_ratio = mean_test / mean_canary        (> 1 means memorization)
    s_ppl     = 1 - mean_canary / mean_test    (0 means no gap)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..canary import CanarySet
from ..corpus import CorpusSplit
from ..models import per_sequence_loss
from ..scoring import s_ppl_from_means


@dataclass
class PerplexityTable:
    """Mean perplexities per split plus the canary gap summary."""

    mean_train: float
    mean_test: float
    mean_canary: float
    per_tier_canary: dict
    gap_ratio: float
    s_ppl: float


def _mean_perplexity(losses):
    # Fixed left-to-right reduction over the split order keeps means
    # bit-stable across runs.
    return sum(math.exp(x) for x in losses) / len(losses)


def perplexity_report(model, split, canary_set, *, losses=None):
    """Build the perplexity gap table for one trained model.

    Args:
        model: a ScoredModel.
        split: CorpusSplit; train here is the original canary-free split.
        canary_set: CanarySet with at least one canary.
        losses: optional precomputed {"train": [...], "test": [...],
            "canary": [...]} per-sequence loss lists, in split order, as
            produced by per_sequence_loss. Computed from the model if absent.

    Returns:
        PerplexityTable.
    """
    if not isinstance(split, CorpusSplit):
        raise TypeError("split must be a CorpusSplit")
    if not isinstance(canary_set, CanarySet):
        raise TypeError("canary_set must be a CanarySet")
    if not split.train:
        raise ValueError("train split is empty")
    if not split.test:
        raise ValueError("test split is empty")
    if not canary_set.canaries:
        raise ValueError("canary set is empty")

    if losses is None:
        losses = compute_split_losses(model, split, canary_set)
    mean_train = _mean_perplexity(losses["train"])
    mean_test = _mean_perplexity(losses["test"])
    mean_canary = _mean_perplexity(losses["canary"])
    per_tier = {}
    for tier in sorted({c.tier for c in canary_set.canaries}):
        tier_losses = [
            losses["canary"][i]
            for i, c in enumerate(canary_set.canaries)
            if c.tier == tier
        ]
        per_tier[tier] = _mean_perplexity(tier_losses)
    return PerplexityTable(
        mean_train=mean_train,
        mean_test=mean_test,
        mean_canary=mean_canary,
        per_tier_canary=per_tier,
        gap_ratio=mean_test / mean_canary,
        s_ppl=s_ppl_from_means(mean_canary, mean_test),
    )


def compute_split_losses(model, split, canary_set=None):
    """Per-sequence losses for train, test, and (optionally) canaries."""
    out = {
        "train": [per_sequence_loss(model, s) for s in split.train],
        "test": [per_sequence_loss(model, s) for s in split.test],
    }
    if canary_set is not None:
        out["canary"] = [per_sequence_loss(model, c.seq) for c in canary_set.canaries]
    return out
