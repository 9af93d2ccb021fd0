"""Likelihood-ratio membership inference over per-sequence losses.

Members (training sequences, canary copies excluded) and nonmembers (held
out test sequences) each get a Gaussian fitted to their per-symbol mean NLL
losses, in sample, without shadow models. A sequence's membership score is
the log density ratio

    score(x) = log N(x; member fit) - log N(x; nonmember fit)

and attack strength is the area under the ROC curve with members positive,
computed by the midrank (Mann-Whitney) formula so ties count one half. The
normalized score is s_mia = max(0, 2 * (AUC - 0.5)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import CorpusSplit
from ..models import per_sequence_loss
from ..scoring import s_mia_from_auc

SIGMA_FLOOR = 1e-6

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    sigma: float


def fit_gaussian(values):
    """Fit mean and population standard deviation, floored at SIGMA_FLOOR."""
    n = len(values)
    if n < 2:
        raise ValueError(f"need at least 2 values to fit, got {n}")
    arr = np.asarray(values, dtype=float)
    mu = float(arr.mean())
    sigma = float(arr.std())  # population convention, divisor n
    if sigma < SIGMA_FLOOR:
        sigma = SIGMA_FLOOR
    return GaussianFit(mu=mu, sigma=sigma)


def gaussian_log_pdf(x, fit):
    z = (x - fit.mu) / fit.sigma
    return -0.5 * z * z - math.log(fit.sigma) - 0.5 * _LOG_2PI


def lira_score(x, fit_member, fit_nonmember):
    """Log likelihood ratio of x under the member versus nonmember fit."""
    return gaussian_log_pdf(x, fit_member) - gaussian_log_pdf(x, fit_nonmember)


def auc_roc(positive_scores, negative_scores):
    """Midrank Mann-Whitney AUC: P(positive > negative) with ties as 1/2."""
    n_pos = len(positive_scores)
    n_neg = len(negative_scores)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both score lists must be non-empty")
    scores = np.concatenate(
        [np.asarray(positive_scores, dtype=float), np.asarray(negative_scores, dtype=float)]
    )
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # Average 1-based rank across the tie group.
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(ranks[:n_pos].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_points(positive_scores, negative_scores):
    """ROC staircase as (fpr, tpr) pairs from (0,0) to (1,1).

    Thresholds sweep the pooled unique scores from high to low; ties move
    the stairstep diagonally.
    """
    n_pos = len(positive_scores)
    n_neg = len(negative_scores)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both score lists must be non-empty")
    pos = np.sort(np.asarray(positive_scores, dtype=float))
    neg = np.sort(np.asarray(negative_scores, dtype=float))
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    points = [(0.0, 0.0)]
    for t in thresholds:
        tpr = float((pos >= t).sum()) / n_pos
        fpr = float((neg >= t).sum()) / n_neg
        points.append((fpr, tpr))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


@dataclass
class MiaResult:
    """Membership inference outcome for one trained model."""

    auc: float
    s_mia: float
    fit_member: GaussianFit
    fit_nonmember: GaussianFit
    member_scores: list
    nonmember_scores: list


def mia_report(model, split, *, losses=None):
    """Run the likelihood-ratio membership attack on a train/test split.

    Members are the original training sequences only; canary copies are
    excluded by construction because the split predates planting.

    Args:
        model: a ScoredModel.
        split: CorpusSplit.
        losses: optional precomputed {"train": [...], "test": [...]} lists.

    Returns:
        MiaResult.
    """
    if not isinstance(split, CorpusSplit):
        raise TypeError("split must be a CorpusSplit")
    if losses is None:
        member_losses = [per_sequence_loss(model, s) for s in split.train]
        nonmember_losses = [per_sequence_loss(model, s) for s in split.test]
    else:
        member_losses = list(losses["train"])
        nonmember_losses = list(losses["test"])
    return mia_from_losses(member_losses, nonmember_losses)


def mia_from_losses(member_losses, nonmember_losses):
    """Membership attack given precomputed per-sequence losses."""
    fit_member = fit_gaussian(member_losses)
    fit_nonmember = fit_gaussian(nonmember_losses)
    member_scores = [lira_score(x, fit_member, fit_nonmember) for x in member_losses]
    nonmember_scores = [
        lira_score(x, fit_member, fit_nonmember) for x in nonmember_losses
    ]
    auc = auc_roc(member_scores, nonmember_scores)
    return MiaResult(
        auc=auc,
        s_mia=s_mia_from_auc(auc),
        fit_member=fit_member,
        fit_nonmember=fit_nonmember,
        member_scores=member_scores,
        nonmember_scores=nonmember_scores,
    )
