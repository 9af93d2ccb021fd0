"""Generate canary sequences and plant them into training corpora.

Canaries are random ACGT strings inserted into training data at known
repetition counts (tiers) so that memorization of rare versus repeated
secrets can be measured afterwards. Generation is decoupled from the
experiment seed through a fixed published XOR constant so the canary set
never collides with any other stream derived from the same seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import ALPHABET, CorpusSplit

# Published constants for deriving sub-seeds from an experiment seed.
CANARY_SEED_XOR = 0x5EEDCAFE
PLANT_SEED_XOR = 0x9E3779B9

DEFAULT_TIERS = ((1, 25), (5, 25), (10, 25), (20, 25))

_MAX_RESAMPLES = 100


@dataclass(frozen=True)
class Canary:
    """One canary: stable id, sequence, and training repetition count."""

    id: int
    seq: str
    tier: int


@dataclass
class CanarySet:
    canaries: list
    generation_seed: int
    tiers: tuple

    def __len__(self):
        return len(self.canaries)

    def by_tier(self):
        """Map tier -> list of canaries, in id order."""
        out = {}
        for c in self.canaries:
            out.setdefault(c.tier, []).append(c)
        return out

    def total_copies(self):
        return sum(c.tier for c in self.canaries)

    def to_dict(self):
        return {
            "format": "canary-set",
            "version": 1,
            "generation_seed": self.generation_seed,
            "tiers": [list(t) for t in self.tiers],
            "canaries": [
                {"id": c.id, "seq": c.seq, "tier": c.tier} for c in self.canaries
            ],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != "canary-set" or data.get("version") != 1:
            raise ValueError("not a version-1 canary-set document")
        return cls(
            canaries=[Canary(c["id"], c["seq"], c["tier"]) for c in data["canaries"]],
            generation_seed=data["generation_seed"],
            tiers=tuple(tuple(t) for t in data["tiers"]),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def derive_generation_seed(experiment_seed):
    return int(experiment_seed) ^ CANARY_SEED_XOR


def derive_plant_seed(experiment_seed):
    return int(experiment_seed) ^ PLANT_SEED_XOR


def generate_canaries(n, length, tiers, experiment_seed):
    """Generate n distinct uniform-random canaries with tier assignments.

    Symbols are uniform over ACGT (same marginal as the synthetic corpus
    generator at gc_content 0.5). Tiers are assigned by position block:
    with tiers ((1, 25), (5, 25), ...) the first 25 canaries get tier 1,
    the next 25 tier 5, and so on; tier counts must sum to n. Duplicate
    draws are resampled, with a hard cap before giving up.

    Args:
        n: number of canaries.
        length: canary length, >= 1.
        tiers: iterable of (tier, count) pairs, tier >= 1, count >= 0.
        experiment_seed: experiment seed; the generator runs on
            experiment_seed XOR CANARY_SEED_XOR.

    Returns:
        CanarySet with canaries in id order 0..n-1.
    """
    tiers = tuple((int(t), int(c)) for t, c in tiers)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    for tier, count in tiers:
        if tier < 1:
            raise ValueError(f"tier must be >= 1, got {tier}")
        if count < 0:
            raise ValueError(f"tier count must be >= 0, got {count}")
    total = sum(c for _, c in tiers)
    if total != n:
        raise ValueError(f"tier counts sum to {total}, expected n = {n}")

    gen_seed = derive_generation_seed(experiment_seed)
    rng = np.random.Generator(np.random.PCG64(gen_seed))
    tier_per_index = []
    for tier, count in tiers:
        tier_per_index.extend([tier] * count)

    seen = set()
    canaries = []
    for idx in range(n):
        for attempt in range(_MAX_RESAMPLES + 1):
            seq = "".join(ALPHABET[i] for i in rng.integers(0, 4, size=length))
            if seq not in seen:
                break
        else:
            raise RuntimeError(
                f"could not draw a distinct canary after {_MAX_RESAMPLES} resamples"
            )
        seen.add(seq)
        canaries.append(Canary(id=idx, seq=seq, tier=tier_per_index[idx]))
    return CanarySet(canaries=canaries, generation_seed=gen_seed, tiers=tiers)


@dataclass
class AugmentedCorpus:
    """Training list with canaries planted, plus the full insertion log."""

    sequences: list
    insertions: list = field(default_factory=list)  # (canary_id, position) log
    base_size: int = 0

    def copies_of(self, canary_id):
        return sum(1 for cid, _ in self.insertions if cid == canary_id)


def plant_canaries(split, canary_set, seed):
    """Insert tier-many copies of each canary into the training list.

    Canaries are processed in id order; each copy is inserted at a
    uniformly random position of the evolving list (PCG64(seed)), so later
    insertions can land between earlier ones. The test split is never
    touched. Returns an AugmentedCorpus whose insertion log records the
    position each copy occupied at insertion time.
    """
    if not isinstance(split, CorpusSplit):
        raise TypeError("split must be a CorpusSplit")
    rng = np.random.Generator(np.random.PCG64(seed))
    sequences = list(split.train)
    insertions = []
    for canary in canary_set.canaries:
        for _ in range(canary.tier):
            pos = int(rng.integers(0, len(sequences) + 1))
            sequences.insert(pos, canary.seq)
            insertions.append((canary.id, pos))
    return AugmentedCorpus(
        sequences=sequences,
        insertions=insertions,
        base_size=len(split.train),
    )
