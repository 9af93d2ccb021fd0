"""Canary extraction: enumerate likely completions and rank the true suffix.

The attacker conditions the model on a known canary prefix and enumerates
suffix candidates in exactly non-increasing model likelihood. The true
suffix's 1-based rank among all |R| = 4^suffix_len completions gives the
exposure in bits:

    exposure = log2(|R|) - log2(rank)

so rank 1 means the full log2(|R|) bits leaked and extraction succeeded.

Exact enumeration runs best-first over a priority queue keyed by cumulative
regret against an optimistic completion bound (an admissible heuristic), so
it stays exact while visiting only candidate-bearing branches; for the
built-in k-gram model the bound is the true best-completion table computed
by dynamic programming over contexts, which also makes flat models cheap
because optimal steps accrue exactly zero regret and ties resolve
lexicographically. Popped completions are re-scored by the plain chain rule
and stably sorted on (-log_prob, suffix), so the returned order is exactly
the exhaustive sort order. A beam mode is kept as a bounded-memory
approximation whose ranks are only heuristic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..canary import CanarySet
from ..corpus import ALPHABET, SYMBOL_INDEX
from ..models import KgramModel

DEFAULT_PREFIX_LEN = 32
DEFAULT_MAX_CANDIDATES = 1000
DEFAULT_BEAM_WIDTH = 10

# Contexts above this count make the exact-completion table too large; the
# search falls back to the constant per-step bound.
_MAX_TABLE_CONTEXTS = 65536

# Do not let an exact search with a weak completion bound eat the machine:
# report runs trip this budget and record the cell as failed instead.
DEFAULT_MAX_EXPANSIONS = 500_000

_NEG_INF = float("-inf")


class ExtractionBudgetError(RuntimeError):
    """Exact search exceeded its node expansion budget."""


def _safe_log(p):
    return math.log(p) if p > 0.0 else _NEG_INF


def _sequential_log_prob(model, prefix, suffix):
    """Chain-rule log probability of suffix given prefix, left to right."""
    total = 0.0
    for i, sym in enumerate(suffix):
        p = model.next_dist(prefix + suffix[:i])[SYMBOL_INDEX[sym]]
        if p <= 0.0:
            return _NEG_INF
        total += math.log(p)
    return total


class _BoundHorizon:
    """Constant optimistic bound: every future step scores at most log_bound.

    Step regret is log_bound - log p, which is exactly zero whenever the
    model emits the bound probability itself (the uniform-model case).
    """

    def __init__(self, model, log_bound):
        self.model = model
        self.log_bound = log_bound

    def start_state(self, prefix):
        return prefix

    def children(self, state, remaining):
        dist = self.model.next_dist(state)
        out = []
        for i in range(4):
            logp = _safe_log(dist[i])
            regret = self.log_bound - logp if logp > _NEG_INF else math.inf
            if regret < 0.0:
                regret = 0.0
            out.append((i, logp, state + ALPHABET[i], regret))
        return out


class _KgramHorizon:
    """Exact best-completion values for a k-gram model.

    V[d][ctx] is the best achievable log probability of any d-step
    completion starting from context ctx (the last order-1 symbols). The
    per-step regret of a move is V[d][ctx] - (log p + V[d-1][ctx']), which
    is exactly 0.0 along locally optimal moves because the DP computed
    V[d][ctx] from the identical float expression.
    """

    def __init__(self, model, suffix_len):
        self.model = model
        k = model.order - 1
        self.ctx_len = k
        n_ctx = 4 ** k
        log_probs = np.empty((n_ctx, 4))
        for c in range(n_ctx):
            dist = model.next_dist(self._ctx_string(c))
            for i in range(4):
                log_probs[c, i] = _safe_log(dist[i])
        if k > 0:
            base = np.arange(n_ctx)
            trans = ((base * 4) % n_ctx)[:, None] + np.arange(4)[None, :]
        else:
            trans = np.zeros((1, 4), dtype=int)
        self.log_probs = log_probs
        self.trans = trans
        tables = [np.zeros(n_ctx)]
        for _ in range(suffix_len):
            cand = log_probs + tables[-1][trans]
            tables.append(cand.max(axis=1))
        self.tables = tables
        self.best_any = [float(t.max()) for t in tables]
        self.log_bound = _safe_log(getattr(model, "max_symbol_prob", 1.0))

    def _ctx_string(self, c):
        out = []
        for _ in range(self.ctx_len):
            out.append(ALPHABET[c % 4])
            c //= 4
        return "".join(reversed(out))

    def start_state(self, prefix):
        if len(prefix) >= self.ctx_len:
            ctx = 0
            for sym in prefix[len(prefix) - self.ctx_len:]:
                ctx = ctx * 4 + SYMBOL_INDEX[sym]
            return ("full", ctx)
        return ("short", prefix)

    def children(self, state, remaining):
        kind, ctx = state
        below = self.tables[remaining - 1]
        out = []
        if kind == "full":
            here = self.tables[remaining][ctx]
            for i in range(4):
                logp = self.log_probs[ctx, i]
                child = int(self.trans[ctx, i])
                if logp == _NEG_INF:
                    out.append((i, float(logp), ("full", child), math.inf))
                    continue
                cand = logp + below[child]
                regret = here - cand
                if regret < 0.0:
                    regret = 0.0
                out.append((i, float(logp), ("full", child), regret))
            return out
        # Short context: the prefix so far is shorter than order-1, so score
        # against the global per-step bound until a full context forms.
        dist = self.model.next_dist(ctx)
        for i in range(4):
            logp = _safe_log(dist[i])
            grown = ctx + ALPHABET[i]
            if len(grown) >= self.ctx_len:
                child_ctx = 0
                for sym in grown[len(grown) - self.ctx_len:]:
                    child_ctx = child_ctx * 4 + SYMBOL_INDEX[sym]
                child = ("full", child_ctx)
                extra = self.best_any[remaining - 1] - below[child_ctx]
            else:
                child = ("short", grown)
                extra = 0.0
            if logp == _NEG_INF:
                out.append((i, logp, child, math.inf))
                continue
            regret = self.log_bound - logp + extra
            if regret < 0.0:
                regret = 0.0
            out.append((i, logp, child, regret))
        return out


def _make_horizon(model, prefix, suffix_len):
    if isinstance(model, KgramModel) and 4 ** (model.order - 1) <= _MAX_TABLE_CONTEXTS:
        return _KgramHorizon(model, suffix_len)
    bound = getattr(model, "max_symbol_prob", 1.0)
    return _BoundHorizon(model, _safe_log(bound))


def enumerate_top_candidates(
    model,
    prefix,
    suffix_len,
    max_candidates,
    *,
    mode="exact",
    beam_width=DEFAULT_BEAM_WIDTH,
    max_expansions=None,
    horizon=None,
):
    """Enumerate suffix candidates in non-increasing model likelihood.

    Args:
        model: a ScoredModel.
        prefix: conditioning prefix (possibly empty ACGT string).
        suffix_len: completion length, >= 1.
        max_candidates: cap on returned candidates, >= 1.
        mode: "exact" for the exact best-first enumeration, "beam" for the
            bounded-memory approximation (at most 4 * beam_width survivors).
        beam_width: beam mode width.
        max_expansions: optional exact-mode node budget; exceeding it raises
            ExtractionBudgetError.
        horizon: internal reuse hook for a prebuilt completion-bound table.

    Returns:
        List of (suffix, log_prob) pairs sorted by descending log_prob with
        exact likelihood ties in lexicographic suffix order. Exact mode
        returns exactly min(max_candidates, 4^suffix_len) items.
    """
    if set(prefix) - set(ALPHABET):
        raise ValueError("prefix contains symbols outside ACGT")
    if suffix_len < 1:
        raise ValueError(f"suffix_len must be >= 1, got {suffix_len}")
    if max_candidates < 1:
        raise ValueError(f"max_candidates must be >= 1, got {max_candidates}")

    if mode == "beam":
        return _beam_enumerate(model, prefix, suffix_len, max_candidates, beam_width)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    target = min(max_candidates, 4 ** suffix_len)
    if horizon is None:
        horizon = _make_horizon(model, prefix, suffix_len)
    heap = [(0.0, "", horizon.start_state(prefix))]
    completions = []
    expansions = 0
    while heap and len(completions) < target:
        g, partial, state = heapq.heappop(heap)
        if len(partial) == suffix_len:
            completions.append(partial)
            continue
        expansions += 1
        if max_expansions is not None and expansions > max_expansions:
            raise ExtractionBudgetError(
                f"exact search exceeded {max_expansions} expansions; "
                "the model is too flat to enumerate exactly at this suffix "
                "length, use beam mode"
            )
        remaining = suffix_len - len(partial)
        for i, logp, child_state, regret in horizon.children(state, remaining):
            heapq.heappush(heap, (g + regret, partial + ALPHABET[i], child_state))

    scored = [(s, _sequential_log_prob(model, prefix, s)) for s in completions]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def _beam_enumerate(model, prefix, suffix_len, max_candidates, beam_width):
    if beam_width < 1:
        raise ValueError(f"beam_width must be >= 1, got {beam_width}")
    beams = [("", 0.0)]
    for depth in range(suffix_len):
        expanded = []
        for partial, lp in beams:
            dist = model.next_dist(prefix + partial)
            for i in range(4):
                p = dist[i]
                step = _safe_log(p)
                expanded.append((partial + ALPHABET[i], lp + step))
        expanded.sort(key=lambda item: (-item[1], item[0]))
        keep = beam_width if depth < suffix_len - 1 else max_candidates
        beams = expanded[:keep]
    return beams


@dataclass(frozen=True)
class ExtractionResult:
    """Outcome of one canary extraction attempt."""

    canary_id: int
    tier: int
    prefix_len: int
    suffix_len: int
    rank: int
    rank_is_lower_bound: bool
    exposure_bits: float
    success: bool


def extract_canary(
    model,
    canary,
    prefix_len=DEFAULT_PREFIX_LEN,
    max_candidates=DEFAULT_MAX_CANDIDATES,
    *,
    mode="exact",
    beam_width=DEFAULT_BEAM_WIDTH,
    max_expansions=None,
    horizon=None,
):
    """Rank a canary's true suffix among enumerated completions.

    If the true suffix is absent from the returned candidates the rank is
    recorded as max_candidates + 1 with rank_is_lower_bound set, making the
    exposure an upper bound. Success means rank exactly 1.
    """
    if not 0 < prefix_len < len(canary.seq):
        raise ValueError(
            f"prefix_len must be in (0, {len(canary.seq)}), got {prefix_len}"
        )
    prefix = canary.seq[:prefix_len]
    true_suffix = canary.seq[prefix_len:]
    suffix_len = len(true_suffix)
    candidates = enumerate_top_candidates(
        model,
        prefix,
        suffix_len,
        max_candidates,
        mode=mode,
        beam_width=beam_width,
        max_expansions=max_expansions,
        horizon=horizon,
    )
    rank = None
    for idx, (suffix, _) in enumerate(candidates):
        if suffix == true_suffix:
            rank = idx + 1
            break
    lower_bound = rank is None
    if lower_bound:
        rank = max_candidates + 1
    exposure = 2.0 * suffix_len - math.log2(rank)
    return ExtractionResult(
        canary_id=canary.id,
        tier=canary.tier,
        prefix_len=prefix_len,
        suffix_len=suffix_len,
        rank=rank,
        rank_is_lower_bound=lower_bound,
        exposure_bits=exposure,
        success=rank == 1,
    )


@dataclass
class ExtractionReport:
    """Per-canary extraction results with per-tier and overall summaries."""

    results: list
    per_tier_success: dict
    per_tier_mean_exposure: dict
    s_ext: float


def extraction_report(
    model,
    canary_set,
    prefix_len=DEFAULT_PREFIX_LEN,
    max_candidates=DEFAULT_MAX_CANDIDATES,
    *,
    mode="exact",
    beam_width=DEFAULT_BEAM_WIDTH,
    max_expansions=DEFAULT_MAX_EXPANSIONS,
):
    """Run extraction for every canary and summarize by tier.

    s_ext is the fraction of canaries extracted at rank 1. Exact searches
    carry a node budget here; a model too flat to enumerate exactly raises
    ExtractionBudgetError, pointing at beam mode.
    """
    if not isinstance(canary_set, CanarySet):
        raise TypeError("canary_set must be a CanarySet")
    if not canary_set.canaries:
        raise ValueError("canary set is empty")
    lengths = {len(c.seq) for c in canary_set.canaries}
    horizon = None
    if mode == "exact" and len(lengths) == 1:
        suffix_len = next(iter(lengths)) - prefix_len
        if suffix_len >= 1:
            horizon = _make_horizon(model, "", suffix_len)
    results = []
    for canary in canary_set.canaries:
        results.append(
            extract_canary(
                model,
                canary,
                prefix_len,
                max_candidates,
                mode=mode,
                beam_width=beam_width,
                max_expansions=max_expansions,
                horizon=horizon,
            )
        )
    per_tier_success = {}
    per_tier_exposure = {}
    for tier in sorted({r.tier for r in results}):
        tier_results = [r for r in results if r.tier == tier]
        per_tier_success[tier] = sum(r.success for r in tier_results) / len(tier_results)
        per_tier_exposure[tier] = sum(r.exposure_bits for r in tier_results) / len(
            tier_results
        )
    s_ext = sum(r.success for r in results) / len(results)
    return ExtractionReport(
        results=results,
        per_tier_success=per_tier_success,
        per_tier_mean_exposure=per_tier_exposure,
        s_ext=s_ext,
    )
