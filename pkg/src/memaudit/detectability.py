"""Could a data curator spot planted canaries by composition alone?

Every sequence gets seven hand-crafted composition features. Each feature
is scored as a univariate canary-vs-training classifier by AUC, and a
from-scratch logistic regression over all features gives the combined
detector, evaluated with stratified cross-validation. Scores near 0.5 mean
the canaries are statistically camouflaged. A feature whose AUC lands near
0 or 1 is flagged as a trivial separator (sequence length does this
whenever canary length differs from the training length; it is included
for completeness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attacks.membership import auc_roc
from .canary import CanarySet
from .corpus import SYMBOL_INDEX, validate_sequence
from .corpus import CorpusSplit

FEATURE_NAMES = (
    "shannon_entropy",
    "gc_content",
    "sequence_length",
    "nucleotide_freq_variance",
    "dinucleotide_chi2",
    "trinucleotide_complexity",
    "autocorrelation_lag1",
)

COMBINED_NAME = "LR_combined"

# Univariate AUC outside this band means the feature separates canaries
# from training data essentially deterministically.
TRIVIAL_SEPARATOR_BAND = (0.05, 0.95)

_MIN_FEATURE_LEN = 4


@dataclass(frozen=True)
class FeatureVector:
    shannon_entropy: float
    gc_content: float
    sequence_length: float
    nucleotide_freq_variance: float
    dinucleotide_chi2: float
    trinucleotide_complexity: float
    autocorrelation_lag1: float

    def as_array(self):
        return np.array([getattr(self, name) for name in FEATURE_NAMES])


def dinucleotide_chi2(seq):
    """Chi-squared deviation of adjacent-pair counts from independence.

    Expected counts come from the pair table's own marginals, so a single
    observed pair always matches its expectation exactly and any length-2
    sequence scores 0. Cells with zero expectation contribute zero.
    """
    pair_counts = np.zeros((4, 4))
    for i in range(len(seq) - 1):
        pair_counts[SYMBOL_INDEX[seq[i]], SYMBOL_INDEX[seq[i + 1]]] += 1.0
    total_pairs = len(seq) - 1
    row = pair_counts.sum(axis=1)
    col = pair_counts.sum(axis=0)
    chi2 = 0.0
    for a in range(4):
        for b in range(4):
            expected = row[a] * col[b] / total_pairs
            if expected > 0.0:
                diff = pair_counts[a, b] - expected
                chi2 += diff * diff / expected
    return chi2


def compute_features(seq):
    """Compute the seven composition features for one sequence.

    Requires length >= 4 so every feature is defined.
    """
    validate_sequence(seq)
    n = len(seq)
    if n < _MIN_FEATURE_LEN:
        raise ValueError(f"need length >= {_MIN_FEATURE_LEN}, got {n}")

    counts = [0, 0, 0, 0]
    for sym in seq:
        counts[SYMBOL_INDEX[sym]] += 1
    freqs = [c / n for c in counts]

    # Base-2 entropy of the nucleotide frequencies; 0 log 0 = 0.
    entropy = -sum(f * math.log2(f) for f in freqs if f > 0.0)
    gc = freqs[1] + freqs[2]
    # Frequencies always average 0.25, so this is the population variance.
    freq_var = sum((f - 0.25) ** 2 for f in freqs) / 4.0

    chi2 = dinucleotide_chi2(seq)

    trinucs = {seq[i:i + 3] for i in range(n - 2)}
    complexity = len(trinucs) / 64.0

    # Lag-1 Pearson autocorrelation on the integer encoding A=0 C=1 G=2 T=3.
    enc = np.array([SYMBOL_INDEX[s] for s in seq], dtype=float)
    x = enc[:-1]
    y = enc[1:]
    sx = x.std()
    sy = y.std()
    if sx == 0.0 or sy == 0.0:
        autocorr = 0.0
    else:
        autocorr = float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))

    return FeatureVector(
        shannon_entropy=float(entropy),
        gc_content=float(gc),
        sequence_length=float(n),
        nucleotide_freq_variance=float(freq_var),
        dinucleotide_chi2=float(chi2),
        trinucleotide_complexity=float(complexity),
        autocorrelation_lag1=autocorr,
    )


def univariate_auc(values, labels):
    """AUC of one feature as a canary detector; canaries are positive."""
    values = list(values)
    labels = list(labels)
    if len(values) != len(labels):
        raise ValueError("values and labels differ in length")
    pos = [v for v, l in zip(values, labels) if l]
    neg = [v for v, l in zip(values, labels) if not l]
    if not pos or not neg:
        raise ValueError("need both classes to compute an AUC")
    return auc_roc(pos, neg)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_fit(X, y, *, lr=0.1, iters=500, l2=1e-4):
    """Full-batch gradient descent logistic regression.

    Returns (weights, bias, losses) where losses is the per-iteration
    L2-regularized mean log loss (the bias is not penalized).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    losses = []
    for _ in range(iters):
        p = _sigmoid(X @ w + b)
        eps = 1e-12
        loss = float(
            -np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps))
            + 0.5 * l2 * float(w @ w)
        )
        losses.append(loss)
        grad_w = X.T @ (p - y) / n + l2 * w
        grad_b = float(np.mean(p - y))
        w = w - lr * grad_w
        b = b - lr * grad_b
    return w, b, losses


def _stratified_folds(labels, folds, seed):
    """Deal shuffled indices of each class round-robin into folds."""
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = np.asarray(labels)
    assignment = np.empty(len(labels), dtype=int)
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = np.arange(len(idx)) % folds
    return assignment


def logistic_cv_auc(features, labels, folds=5, seed=0, *, lr=0.1, iters=500, l2=1e-4):
    """Mean held-out AUC of the combined logistic detector.

    Features are z-scored per fold using training-fold statistics only
    (zero-variance features are zeroed). Folds are stratified and seeded.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be 2-D and aligned with labels")
    assignment = _stratified_folds(y, folds, seed)
    aucs = []
    for fold in range(folds):
        train_mask = assignment != fold
        test_mask = ~train_mask
        if y[test_mask].min() == y[test_mask].max():
            raise ValueError(f"fold {fold} lost a class; use fewer folds")
        mu = X[train_mask].mean(axis=0)
        sigma = X[train_mask].std(axis=0)
        sigma_safe = np.where(sigma > 0.0, sigma, 1.0)
        z_train = np.where(sigma > 0.0, (X[train_mask] - mu) / sigma_safe, 0.0)
        z_test = np.where(sigma > 0.0, (X[test_mask] - mu) / sigma_safe, 0.0)
        w, b, _ = logistic_fit(z_train, y[train_mask], lr=lr, iters=iters, l2=l2)
        scores = z_test @ w + b
        aucs.append(auc_roc(scores[y[test_mask] == 1], scores[y[test_mask] == 0]))
    return float(np.mean(aucs))


@dataclass
class DetectabilityRow:
    feature: str
    auc: float
    trivial_separator: bool


@dataclass
class DetectabilityReport:
    """Univariate and combined detectability for one seed's mixed corpus."""

    rows: list
    n_train: int
    n_canary_rows: int

    def auc_of(self, feature):
        for row in self.rows:
            if row.feature == feature:
                return row.auc
        raise KeyError(feature)


def detectability_report(split, canary_set, *, folds=5, seed=0):
    """Score every feature and the combined detector on the mixed corpus.

    The mixed corpus is the deduplicated planted training corpus: every
    training sequence (label 0) plus each distinct canary once (label 1).
    Exact-duplicate structure is deliberately not part of the question
    here; duplicate rows would hand any detector the repetition count as
    a free signal (identical rows recur across CV folds), while this
    audit asks whether canary content is distinguishable by its features.
    """
    if not isinstance(split, CorpusSplit):
        raise TypeError("split must be a CorpusSplit")
    if not isinstance(canary_set, CanarySet):
        raise TypeError("canary_set must be a CanarySet")
    if not canary_set.canaries:
        raise ValueError("canary set is empty")
    sequences = list(split.train)
    labels = [0] * len(sequences)
    for canary in canary_set.canaries:
        sequences.append(canary.seq)
        labels.append(1)
    matrix = np.array([compute_features(s).as_array() for s in sequences])
    rows = []
    lo, hi = TRIVIAL_SEPARATOR_BAND
    for j, name in enumerate(FEATURE_NAMES):
        auc = univariate_auc(matrix[:, j], labels)
        rows.append(
            DetectabilityRow(
                feature=name,
                auc=auc,
                trivial_separator=not lo <= auc <= hi,
            )
        )
    combined = logistic_cv_auc(matrix, labels, folds=folds, seed=seed)
    rows.append(
        DetectabilityRow(
            feature=COMBINED_NAME,
            auc=combined,
            trivial_separator=not lo <= combined <= hi,
        )
    )
    return DetectabilityReport(
        rows=rows,
        n_train=len(split.train),
        n_canary_rows=len(canary_set.canaries),
    )
