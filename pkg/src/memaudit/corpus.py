"""Build sequence corpora: synthetic generation, FASTA ingestion, windowing, splits.

Sequences are plain uppercase strings over the alphabet ACGT. All randomness
flows through numpy's PCG64 generator seeded explicitly, so every corpus
operation is reproducible bit for bit from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALPHABET = "ACGT"
SYMBOL_INDEX = {sym: i for i, sym in enumerate(ALPHABET)}
_VALID_SYMBOLS = frozenset(ALPHABET)


class FastaError(ValueError):
    """Malformed FASTA input."""


def validate_sequence(seq):
    """Raise ValueError unless seq is a non-empty uppercase ACGT string."""
    if not isinstance(seq, str):
        raise ValueError(f"sequence must be str, got {type(seq).__name__}")
    if not seq:
        raise ValueError("sequence is empty")
    bad = set(seq) - _VALID_SYMBOLS
    if bad:
        raise ValueError(f"sequence contains symbols outside ACGT: {sorted(bad)!r}")
    return seq


def is_valid_sequence(seq):
    return isinstance(seq, str) and bool(seq) and not (set(seq) - _VALID_SYMBOLS)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def generate_synthetic(count, length, gc_content, seed):
    """Generate i.i.d. synthetic sequences with a target GC composition.

    Each position is drawn independently with P(G) = P(C) = gc_content / 2
    and P(A) = P(T) = (1 - gc_content) / 2. Draws come from PCG64(seed) as
    row-major uniforms mapped through the cumulative symbol distribution,
    so output is identical across platforms for a given seed.

    Args:
        count: number of sequences.
        length: length of every sequence, >= 1.
        gc_content: combined G+C probability in [0, 1].
        seed: integer seed.

    Returns:
        List of `count` strings of length `length`.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if not 0.0 <= gc_content <= 1.0:
        raise ValueError(f"gc_content must be in [0, 1], got {gc_content}")
    p_at = (1.0 - gc_content) / 2.0
    p_gc = gc_content / 2.0
    # Cumulative over alphabet order A, C, G, T.
    cum = np.cumsum([p_at, p_gc, p_gc, p_at])
    cum[-1] = 1.0
    uniforms = _rng(seed).random((count, length))
    indices = np.searchsorted(cum, uniforms, side="right")
    symbols = np.array(list(ALPHABET))
    return ["".join(row) for row in symbols[indices]]


def parse_fasta(data):
    """Parse FASTA text into (header, sequence) records.

    Headers are the text after '>' up to end of line. Sequence lines are
    uppercased and concatenated; record order is preserved. Raises
    FastaError on empty input or on sequence data appearing before the
    first header.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii")
    records = []
    header = None
    parts = []
    saw_content = False
    for raw in data.splitlines():
        line = raw.strip()
        if not line:
            continue
        saw_content = True
        if line.startswith(">"):
            if header is not None:
                records.append((header, "".join(parts)))
            header = line[1:].strip()
            parts = []
        else:
            if header is None:
                raise FastaError(f"sequence data before first header: {line[:40]!r}")
            parts.append(line.upper())
    if header is not None:
        records.append((header, "".join(parts)))
    if not saw_content:
        raise FastaError("empty FASTA input")
    return records


def load_fasta(path):
    with open(path, "rb") as fh:
        return parse_fasta(fh.read())


def center_crop(seq, target_len):
    """Crop seq to target_len keeping the center.

    When the discarded margin is odd the extra base comes off the right end.
    """
    margin = len(seq) - target_len
    if margin < 0:
        raise ValueError(f"sequence length {len(seq)} < target_len {target_len}")
    left = margin // 2
    return seq[left:left + target_len]


def window_genome(records, window_len, stride, target_len=None):
    """Cut fixed-length windows from genome records at a fixed stride.

    Windows start at offsets 0, stride, 2*stride, ... while they fit inside
    the record. Windows containing any symbol outside ACGT are discarded.
    Each surviving window is center-cropped to target_len (default: no crop,
    target_len = window_len).

    Args:
        records: (header, sequence) pairs as produced by parse_fasta, or
            plain sequence strings.
        window_len: window size, >= 1.
        stride: offset step, >= 1.
        target_len: final length after center crop, <= window_len.

    Returns:
        List of windows in genomic order.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if target_len is None:
        target_len = window_len
    if target_len < 1 or target_len > window_len:
        raise ValueError(f"target_len must be in [1, window_len], got {target_len}")
    windows = []
    for rec in records:
        seq = rec[1] if isinstance(rec, tuple) else rec
        seq = seq.upper()
        for start in range(0, len(seq) - window_len + 1, stride):
            window = seq[start:start + window_len]
            if set(window) - _VALID_SYMBOLS:
                continue
            windows.append(center_crop(window, target_len))
    return windows


def load_prepared(path, target_len=None):
    """Load a prepared corpus file: one sequence per line.

    Lines are uppercased and validated like windows: lines containing
    non-ACGT symbols are discarded, and so are lines shorter than
    target_len. Surviving lines are center-cropped to target_len when given.
    """
    out = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip().upper()
            if not line or (set(line) - _VALID_SYMBOLS):
                continue
            if target_len is not None:
                if len(line) < target_len:
                    continue
                line = center_crop(line, target_len)
            out.append(line)
    return out


def write_sequences(path, seqs):
    """Write sequences as a newline-delimited text file."""
    with open(path, "w") as fh:
        for seq in seqs:
            fh.write(seq + "\n")


def read_sequences(path):
    """Read a newline-delimited sequence file, validating every line."""
    out = []
    with open(path) as fh:
        for i, raw in enumerate(fh):
            line = raw.strip()
            if not line:
                continue
            try:
                validate_sequence(line)
            except ValueError as exc:
                raise ValueError(f"{path}:{i + 1}: {exc}") from exc
            out.append(line)
    return out


@dataclass(frozen=True)
class CorpusSplit:
    """Disjoint train/test sequence lists plus the seed that made them."""

    train: tuple
    test: tuple
    seed: int
    source: str = "pool"

    def __post_init__(self):
        overlap = set(self.train) & set(self.test)
        if overlap:
            raise ValueError(f"train/test overlap on {len(overlap)} sequences")


def split_corpus(pool, n_train, n_test, seed, source="pool"):
    """Sample disjoint train and test sets from a candidate pool.

    The pool is deduplicated (first occurrence wins) so train and test are
    disjoint as exact strings, then a seeded PCG64 permutation picks
    n_train + n_test members: the first n_train form the train split and
    the next n_test the test split.
    """
    if n_train < 0 or n_test < 0:
        raise ValueError("n_train and n_test must be >= 0")
    distinct = list(dict.fromkeys(pool))
    needed = n_train + n_test
    if len(distinct) < needed:
        raise ValueError(
            f"pool has {len(distinct)} distinct sequences, need {needed} "
            f"({n_train} train + {n_test} test)"
        )
    order = _rng(seed).permutation(len(distinct))
    picked = [distinct[i] for i in order[:needed]]
    return CorpusSplit(
        train=tuple(picked[:n_train]),
        test=tuple(picked[n_train:needed]),
        seed=seed,
        source=source,
    )
