import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memaudit.attacks.membership import (
    SIGMA_FLOOR,
    auc_roc,
    fit_gaussian,
    gaussian_log_pdf,
    lira_score,
    mia_from_losses,
    mia_report,
    roc_points,
)
from memaudit.canary import plant_canaries, generate_canaries
from memaudit.scoring import s_mia_from_auc
from memaudit.corpus import generate_synthetic, split_corpus
from memaudit.models import train_kgram

score_lists = st.lists(
    st.floats(-50, 50, allow_nan=False, allow_infinity=False), min_size=1, max_size=40
)


# --- Gaussian fits ---


def test_fit_gaussian_population_convention():
    fit = fit_gaussian([0.0, 2.0])
    assert fit.mu == 1.0
    assert fit.sigma == 1.0  # population std, divisor n


def test_fit_gaussian_floor():
    fit = fit_gaussian([1.0, 1.0, 1.0])
    assert fit.mu == 1.0
    assert fit.sigma == SIGMA_FLOOR


def test_fit_gaussian_recovers_parameters():
    rng = np.random.Generator(np.random.PCG64(0))
    sample = rng.normal(3.0, 0.5, size=20000)
    fit = fit_gaussian(sample)
    assert abs(fit.mu - 3.0) / 3.0 < 0.05
    assert abs(fit.sigma - 0.5) / 0.5 < 0.05


def test_fit_gaussian_needs_two_values():
    with pytest.raises(ValueError, match="at least 2"):
        fit_gaussian([1.0])


def test_gaussian_log_pdf_closed_form():
    fit = fit_gaussian([0.0, 2.0])  # mu 1, sigma 1
    for x in (-1.0, 1.0, 2.5):
        expected = -0.5 * (x - 1.0) ** 2 - 0.5 * math.log(2 * math.pi)
        assert gaussian_log_pdf(x, fit) == pytest.approx(expected, abs=1e-12)


def test_lira_score_semantics():
    member = fit_gaussian([0.0, 2.0])
    nonmember = fit_gaussian([4.0, 6.0])
    assert lira_score(1.0, member, nonmember) > 0.0
    assert lira_score(5.0, member, nonmember) < 0.0
    assert lira_score(3.0, member, member) == 0.0


# --- AUC ---


def test_auc_pairwise_oracle():
    # Pairs (1,2) (1,4) (3,2) (3,4): one member win in four.
    assert auc_roc([1.0, 3.0], [2.0, 4.0]) == 0.25


def test_auc_perfect_and_chance():
    assert auc_roc([2.0, 3.0], [0.0, 1.0]) == 1.0
    assert auc_roc([0.0, 1.0], [2.0, 3.0]) == 0.0
    assert auc_roc([5.0, 7.0], [5.0, 7.0]) == 0.5


def test_auc_ties_count_half():
    # Pairs (1 vs 2): loss; (2 vs 2): half. AUC = 0.5 / 2.
    assert auc_roc([1.0, 2.0], [2.0]) == 0.25
    assert auc_roc([2.0, 3.0], [2.0]) == 0.75


def test_auc_empty_error():
    with pytest.raises(ValueError, match="non-empty"):
        auc_roc([], [1.0])


@given(pos=score_lists, neg=score_lists)
@settings(max_examples=80, deadline=None)
def test_auc_complement_symmetry(pos, neg):
    assert auc_roc(pos, neg) + auc_roc(neg, pos) == pytest.approx(1.0, abs=1e-9)


# Grid-valued scores and power-of-two scales keep the transform exactly
# tie-preserving in floating point, so rank patterns cannot shift.
grid_scores = st.lists(
    st.integers(-500, 500).map(lambda n: n / 10.0), min_size=1, max_size=40
)


@given(
    pos=grid_scores,
    neg=grid_scores,
    scale=st.sampled_from([0.5, 1.0, 2.0, 4.0]),
    shift=st.sampled_from([-5.0, 0.0, 3.5]),
)
@settings(max_examples=80, deadline=None)
def test_auc_monotone_transform_invariance(pos, neg, scale, shift):
    base = auc_roc(pos, neg)
    affine = auc_roc([scale * x + shift for x in pos], [scale * x + shift for x in neg])
    assert affine == base


def test_auc_matches_pairwise_count_on_random_sets():
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(20):
        pos = list(np.round(rng.normal(size=9), 1))  # rounding forces ties
        neg = list(np.round(rng.normal(size=6), 1))
        wins = sum(
            1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg
        )
        assert auc_roc(pos, neg) == pytest.approx(wins / (len(pos) * len(neg)))


# --- ROC curve ---


def test_roc_points_staircase():
    points = roc_points([2.0, 3.0], [0.0, 1.0])
    assert points[0] == (0.0, 0.0)
    assert points[-1] == (1.0, 1.0)
    fprs = [p[0] for p in points]
    tprs = [p[1] for p in points]
    assert fprs == sorted(fprs)
    assert tprs == sorted(tprs)
    # Perfect separation passes through (0, 1).
    assert (0.0, 1.0) in points


def test_roc_area_equals_auc():
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(10):
        pos = list(np.round(rng.normal(0.5, 1.0, size=12), 1))
        neg = list(np.round(rng.normal(0.0, 1.0, size=8), 1))
        points = roc_points(pos, neg)
        area = sum(
            (x1 - x0) * (y0 + y1) / 2.0
            for (x0, y0), (x1, y1) in zip(points, points[1:])
        )
        assert area == pytest.approx(auc_roc(pos, neg), abs=1e-12)


# --- end-to-end attack ---


def test_mia_from_losses_fields():
    members = [0.9, 1.0, 1.1, 1.0]
    nonmembers = [1.3, 1.4, 1.5, 1.2]
    res = mia_from_losses(members, nonmembers)
    assert res.auc == 1.0
    assert res.s_mia == 1.0
    assert res.fit_member.mu == pytest.approx(1.0)
    assert len(res.member_scores) == 4
    assert len(res.nonmember_scores) == 4
    # Scores are the log density ratios of the fitted Gaussians.
    assert res.member_scores[0] == pytest.approx(
        lira_score(0.9, res.fit_member, res.fit_nonmember)
    )


def test_s_mia_clamps_at_chance():
    # In-sample fits cannot push AUC below 0.5: identical populations are
    # the boundary case and land exactly on chance.
    losses = [1.3, 1.4, 1.5, 1.2]
    res = mia_from_losses(losses, list(losses))
    assert res.auc == 0.5
    assert res.s_mia == 0.0
    assert s_mia_from_auc(0.4) == 0.0
    assert s_mia_from_auc(0.5) == 0.0


def test_mia_report_on_memorizing_model():
    pool = generate_synthetic(60, 24, 0.5, seed=6)
    split = split_corpus(pool, 40, 20, seed=6)
    cs = generate_canaries(4, 24, ((5, 4),), experiment_seed=6)
    augmented = plant_canaries(split, cs, seed=6)
    model = train_kgram(augmented.sequences, order=5)
    res = mia_report(model, split)
    assert 0.5 < res.auc <= 1.0
    assert res.s_mia == pytest.approx(2 * (res.auc - 0.5))
    losses = {
        "train": [
            -model.sequence_log_prob(s) / len(s) for s in split.train
        ],
        "test": [-model.sequence_log_prob(s) / len(s) for s in split.test],
    }
    assert mia_report(model, split, losses=losses) == res


def test_mia_report_type_validation():
    with pytest.raises(TypeError, match="CorpusSplit"):
        mia_report(None, ["AAAA"])
