"""Scored sequence models: the capability protocol and the k-gram reference.

A scored model exposes two operations over ACGT strings:

    sequence_log_prob(seq) -> float   natural-log probability of the string
    next_dist(prefix)      -> 4 floats over A, C, G, T summing to 1

The built-in reference is an interpolated additive-smoothing k-gram model.
For a prefix, the conditional distribution is computed by a recursion over
context lengths j = min(order - 1, len(prefix)) down to 0:

    P_after_j(x) = (count(ctx_j, x) + lam * P_below(x)) / (count(ctx_j) + lam)

where ctx_j is the last j symbols of the prefix and the base distribution
below level 0 is uniform (0.25 each). A context level with no counts leaves
the distribution unchanged, which equals the formula at count 0. Training
counts every (context, next symbol) pair for context lengths 0..order-1
within each sequence, and duplicate training sequences contribute duplicate
counts; repetition is exactly what makes memorization measurable.
"""

from __future__ import annotations

import json
import math
from typing import Protocol, runtime_checkable

from .corpus import ALPHABET, SYMBOL_INDEX, validate_sequence

_UNIFORM = (0.25, 0.25, 0.25, 0.25)
_LOG_QUARTER = math.log(0.25)

MODEL_FORMAT = "kgram-model"
MODEL_FORMAT_VERSION = 1


@runtime_checkable
class ScoredModel(Protocol):
    """Minimum capability the attack vectors need.

    Implementations may additionally expose a float attribute
    `max_symbol_prob`: a sound upper bound on every component of every
    next_dist output. Extraction search uses it to prune; absent means 1.0.
    """

    def sequence_log_prob(self, seq: str) -> float: ...

    def next_dist(self, prefix: str) -> tuple: ...


class UniformModel:
    """Memoryless uniform model: every symbol has probability 1/4."""

    max_symbol_prob = 0.25

    def sequence_log_prob(self, seq):
        validate_sequence(seq)
        return len(seq) * _LOG_QUARTER

    def next_dist(self, prefix):
        return _UNIFORM


class KgramModel:
    """Interpolated additive-smoothing k-gram model over ACGT.

    tables[j] maps a length-j context string to a 4-list of integer counts
    indexed by symbol (A=0, C=1, G=2, T=3). Instances are immutable after
    training; next_dist results are memoized per context.
    """

    def __init__(self, order, lam, tables):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if not lam > 0:
            raise ValueError(f"lam must be > 0, got {lam}")
        if len(tables) != order:
            raise ValueError(f"expected {order} context tables, got {len(tables)}")
        self.order = order
        self.lam = float(lam)
        self.tables = tables
        self._dist_cache = {}
        self._max_symbol_prob = None

    # --- scoring ---

    def next_dist(self, prefix):
        ctx_len = min(self.order - 1, len(prefix))
        ctx = prefix[len(prefix) - ctx_len:]
        cached = self._dist_cache.get(ctx)
        if cached is not None:
            return cached
        dist = _UNIFORM
        lam = self.lam
        for j in range(ctx_len + 1):
            counts = self.tables[j].get(ctx[ctx_len - j:])
            if counts is None:
                continue
            denom = counts[0] + counts[1] + counts[2] + counts[3] + lam
            dist = (
                (counts[0] + lam * dist[0]) / denom,
                (counts[1] + lam * dist[1]) / denom,
                (counts[2] + lam * dist[2]) / denom,
                (counts[3] + lam * dist[3]) / denom,
            )
        self._dist_cache[ctx] = dist
        return dist

    def sequence_log_prob(self, seq):
        """Chain-rule sum of log next-symbol probabilities, left to right."""
        validate_sequence(seq)
        total = 0.0
        for i in range(len(seq)):
            total += math.log(self.next_dist(seq[:i])[SYMBOL_INDEX[seq[i]]])
        return total

    # --- bounds ---

    @property
    def max_symbol_prob(self):
        """Sound upper bound on any next_dist component.

        Computed level by level: B_0 = 0.25 and
        B_j = max(B_{j-1}, max over stored contexts of
                  (max count + lam * B_{j-1}) / (total + lam)),
        taking the running max because an unseen context at level j falls
        through to the level below.
        """
        if self._max_symbol_prob is None:
            bound = 0.25
            lam = self.lam
            for table in self.tables:
                level = bound
                for counts in table.values():
                    total = counts[0] + counts[1] + counts[2] + counts[3]
                    top = (max(counts) + lam * bound) / (total + lam)
                    if top > level:
                        level = top
                bound = level
            self._max_symbol_prob = min(bound, 1.0)
        return self._max_symbol_prob

    # --- serialization ---

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "order": self.order,
            "lambda": self.lam,
            "tables": [
                {ctx: list(counts) for ctx, counts in sorted(table.items())}
                for table in self.tables
            ],
        }

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != MODEL_FORMAT:
            raise ValueError("not a kgram-model document")
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')!r}")
        tables = [
            {ctx: list(map(int, counts)) for ctx, counts in table.items()}
            for table in data["tables"]
        ]
        return cls(order=int(data["order"]), lam=float(data["lambda"]), tables=tables)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def train_kgram(sequences, order=6, lam=1.0):
    """Count-train a KgramModel on a list of sequences.

    For each sequence and each position i, every context length
    j = 0..min(i, order-1) contributes one (context, next symbol) count.
    Duplicate sequences contribute duplicate counts.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    tables = [dict() for _ in range(order)]
    for seq in sequences:
        validate_sequence(seq)
        for i, sym in enumerate(seq):
            x = SYMBOL_INDEX[sym]
            for j in range(min(i, order - 1) + 1):
                table = tables[j]
                ctx = seq[i - j:i]
                counts = table.get(ctx)
                if counts is None:
                    counts = [0, 0, 0, 0]
                    table[ctx] = counts
                counts[x] += 1
    return KgramModel(order=order, lam=lam, tables=tables)


def perplexity(model, seq):
    """Per-symbol perplexity exp(-log_prob / len); uniform model gives 4.0."""
    n = len(seq)
    if n == 0:
        raise ValueError("sequence is empty")
    return math.exp(-model.sequence_log_prob(seq) / n)


def per_sequence_loss(model, seq):
    """Mean per-symbol negative log likelihood, natural log."""
    n = len(seq)
    if n == 0:
        raise ValueError("sequence is empty")
    return -model.sequence_log_prob(seq) / n
