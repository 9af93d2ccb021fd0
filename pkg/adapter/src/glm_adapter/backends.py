"""Scoring backends: the uniform mock and the k-gram file evaluator.

Every backend exposes:

    info_name        free-text name sent in the handshake
    score(seq)       natural-log probability of the full string
    next_dist(ctx)   4 floats over A, C, G, T summing to 1

plus optionally max_symbol_prob (a sound upper bound on any next_dist
component) and score_many(seqs) for batched scoring.

The k-gram evaluator reads the same JSON files the auditor's built-in
model writes and reproduces their arithmetic operation for operation,
so a loopback differential run is expected to agree to float precision;
any larger gap is a real defect on one side.
"""

import json
import math
from pathlib import Path

from .wire import ALPHABET

LOG_QUARTER = math.log(0.25)
SYMBOL_INDEX = {sym: i for i, sym in enumerate(ALPHABET)}
UNIFORM = (0.25, 0.25, 0.25, 0.25)

MODEL_FORMAT = "kgram-model"
MODEL_FORMAT_VERSION = 1


class BackendError(RuntimeError):
    """The configured model could not be loaded."""


class MockUniform:
    """Memoryless uniform model over ACGT, for conformance testing."""

    info_name = "mock-uniform"
    max_symbol_prob = 0.25

    def score(self, seq):
        return len(seq) * LOG_QUARTER

    def next_dist(self, prefix):
        return UNIFORM


class KgramEvaluator:
    """Interpolated k-gram tables from a saved model file.

    tables[j] maps a length-j context to four next-symbol counts. The
    conditional distribution starts uniform and is refined through
    ascending context lengths:

        P_j(x) = (count_j(ctx_j, x) + lam * P_{j-1}(x)) / (total_j + lam)

    skipping levels whose context was never seen. Scores are chain-rule
    sums of log next-symbol probabilities, left to right.
    """

    info_name = "glm-adapter-kgram"

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
        self._cache = {}
        self.max_symbol_prob = self._bound()

    def _bound(self):
        # level by level: an unseen context falls through to the level
        # below, so carry the running max
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
        return min(bound, 1.0)

    def next_dist(self, prefix):
        ctx_len = min(self.order - 1, len(prefix))
        ctx = prefix[len(prefix) - ctx_len:]
        cached = self._cache.get(ctx)
        if cached is not None:
            return cached
        dist = UNIFORM
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
        self._cache[ctx] = dist
        return dist

    def score(self, seq):
        total = 0.0
        for i in range(len(seq)):
            total += math.log(self.next_dist(seq[:i])[SYMBOL_INDEX[seq[i]]])
        return total

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise BackendError(f"{path}: {exc}") from exc
        if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
            raise BackendError(f"{path}: not a {MODEL_FORMAT} document")
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise BackendError(f"{path}: unsupported model version {data.get('version')!r}")
        try:
            tables = [
                {ctx: [int(c) for c in counts] for ctx, counts in table.items()}
                for table in data["tables"]
            ]
            return cls(int(data["order"]), float(data["lambda"]), tables)
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendError(f"{path}: malformed model: {exc}") from exc


def load_backend(config):
    """Resolve the configured model string to a backend instance.

    "mock" selects the uniform model; an existing file must be a saved
    k-gram model; anything else is treated as a transformer checkpoint
    id or directory, requiring the hf extra.
    """
    if config.model == "mock":
        return MockUniform()
    if Path(config.model).is_file():
        return KgramEvaluator.load(config.model)
    try:
        from . import hf
    except ImportError as exc:
        raise BackendError(
            "transformer models need the hf extra (pip install glm-adapter[hf])"
        ) from exc
    return hf.TransformerBackend(config)
