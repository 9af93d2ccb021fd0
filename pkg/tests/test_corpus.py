import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memaudit.corpus import (
    ALPHABET,
    CorpusSplit,
    FastaError,
    center_crop,
    generate_synthetic,
    is_valid_sequence,
    load_fasta,
    load_prepared,
    parse_fasta,
    read_sequences,
    split_corpus,
    validate_sequence,
    window_genome,
    write_sequences,
)

VALID = set(ALPHABET)


def test_validate_sequence_accepts_acgt():
    assert validate_sequence("ACGT") == "ACGT"
    assert is_valid_sequence("GATTACA")


def test_validate_sequence_rejects_bad_input():
    with pytest.raises(ValueError, match="empty"):
        validate_sequence("")
    with pytest.raises(ValueError, match="outside ACGT"):
        validate_sequence("ACGN")
    with pytest.raises(ValueError, match="must be str"):
        validate_sequence(b"ACGT")
    assert not is_valid_sequence("acgt")
    assert not is_valid_sequence("")


# --- synthetic generation ---


def test_generate_synthetic_shape_and_alphabet():
    seqs = generate_synthetic(7, 31, 0.5, seed=1)
    assert len(seqs) == 7
    assert all(len(s) == 31 for s in seqs)
    assert all(set(s) <= VALID for s in seqs)


def test_generate_synthetic_deterministic():
    a = generate_synthetic(20, 50, 0.4, seed=99)
    b = generate_synthetic(20, 50, 0.4, seed=99)
    c = generate_synthetic(20, 50, 0.4, seed=100)
    assert a == b
    assert a != c


def test_generate_synthetic_gc_extremes():
    only_at = generate_synthetic(10, 100, 0.0, seed=3)
    assert set("".join(only_at)) <= {"A", "T"}
    only_gc = generate_synthetic(10, 100, 1.0, seed=3)
    assert set("".join(only_gc)) <= {"G", "C"}


def test_generate_synthetic_gc_convergence():
    # Pooled G+C frequency approaches the target at the 1e6-base scale.
    seqs = generate_synthetic(4000, 256, 0.4, seed=11)
    pooled = "".join(seqs)
    assert len(pooled) >= 10**6
    gc = sum(1 for s in pooled if s in "GC") / len(pooled)
    assert abs(gc - 0.4) < 0.01


def test_generate_synthetic_validation():
    with pytest.raises(ValueError, match="count"):
        generate_synthetic(-1, 10, 0.5, seed=0)
    with pytest.raises(ValueError, match="length"):
        generate_synthetic(1, 0, 0.5, seed=0)
    with pytest.raises(ValueError, match="gc_content"):
        generate_synthetic(1, 10, 1.5, seed=0)
    assert generate_synthetic(0, 10, 0.5, seed=0) == []


@given(
    count=st.integers(0, 20),
    length=st.integers(1, 40),
    gc=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=50, deadline=None)
def test_generate_synthetic_properties(count, length, gc, seed):
    seqs = generate_synthetic(count, length, gc, seed)
    assert len(seqs) == count
    for s in seqs:
        assert len(s) == length
        assert set(s) <= VALID


# --- FASTA ---


def test_parse_fasta_records():
    text = ">chr1 first\nacgt\nACGT\n\n>chr2\nTT\nGG\n"
    records = parse_fasta(text)
    assert records == [("chr1 first", "ACGTACGT"), ("chr2", "TTGG")]


def test_parse_fasta_bytes_and_header_only():
    assert parse_fasta(b">x\nAC\n") == [("x", "AC")]
    assert parse_fasta(">empty\n>y\nA\n") == [("empty", ""), ("y", "A")]


def test_parse_fasta_errors():
    with pytest.raises(FastaError, match="empty"):
        parse_fasta("   \n\n")
    with pytest.raises(FastaError, match="before first header"):
        parse_fasta("ACGT\n>late\nAC\n")


def test_load_fasta_roundtrip(tmp_path):
    path = tmp_path / "g.fa"
    path.write_text(">a\nACGTACGT\n>b\nTTTT\n")
    assert load_fasta(path) == [("a", "ACGTACGT"), ("b", "TTTT")]


# --- cropping and windowing ---


def test_center_crop_even_margin():
    assert center_crop("AACCGGTT", 4) == "CCGG"


def test_center_crop_odd_margin_takes_extra_from_right():
    # Margin 3: one base dropped on the left, two on the right.
    assert center_crop("ACGTA", 2) == "CG"
    assert center_crop("ACGTACG", 4) == "CGTA"


def test_center_crop_identity_and_error():
    assert center_crop("ACGT", 4) == "ACGT"
    with pytest.raises(ValueError, match="target_len"):
        center_crop("ACG", 4)


def test_window_genome_stride_and_order():
    records = [("chr", "AACCGGTTAA")]
    assert window_genome(records, 4, 2) == ["AACC", "CCGG", "GGTT", "TTAA"]
    assert window_genome(records, 4, 4) == ["AACC", "GGTT"]
    # Tail shorter than the window is dropped.
    assert window_genome(records, 8, 4) == ["AACCGGTT"]


def test_window_genome_discards_invalid_windows():
    records = [("chr", "AANCGGTT")]
    # Windows covering the N are dropped, later clean windows kept.
    assert window_genome(records, 4, 1) == ["CGGT", "GGTT"]


def test_window_genome_center_crops_and_accepts_plain_strings():
    assert window_genome(["aaccggtt"], 8, 8, target_len=4) == ["CCGG"]


def test_window_genome_validation():
    with pytest.raises(ValueError, match="window_len"):
        window_genome([], 0, 1)
    with pytest.raises(ValueError, match="stride"):
        window_genome([], 4, 0)
    with pytest.raises(ValueError, match="target_len"):
        window_genome([], 4, 1, target_len=5)


def test_load_prepared_filters_and_crops(tmp_path):
    path = tmp_path / "prep.txt"
    path.write_text("AACCGGTT\nacgtacgt\nbadline!\nAC\n\nTTTTTTTT\n")
    assert load_prepared(path) == ["AACCGGTT", "ACGTACGT", "AC", "TTTTTTTT"]
    # With a target length: short lines dropped, others center-cropped.
    assert load_prepared(path, target_len=4) == ["CCGG", "GTAC", "TTTT"]


def test_sequence_file_roundtrip(tmp_path):
    path = tmp_path / "seqs.txt"
    seqs = ["ACGT", "TT", "GGGG"]
    write_sequences(path, seqs)
    assert read_sequences(path) == seqs


def test_read_sequences_error_names_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("ACGT\nACGU\n")
    with pytest.raises(ValueError, match=r"bad.txt:2"):
        read_sequences(path)


# --- splits ---


def test_split_corpus_sizes_and_disjointness():
    pool = generate_synthetic(50, 12, 0.5, seed=5)
    split = split_corpus(pool, 30, 10, seed=7)
    assert len(split.train) == 30
    assert len(split.test) == 10
    assert not set(split.train) & set(split.test)
    assert set(split.train) | set(split.test) <= set(pool)


def test_split_corpus_deterministic():
    pool = generate_synthetic(40, 10, 0.5, seed=5)
    a = split_corpus(pool, 20, 10, seed=1)
    b = split_corpus(pool, 20, 10, seed=1)
    c = split_corpus(pool, 20, 10, seed=2)
    assert a == b
    assert a.train != c.train or a.test != c.test


def test_split_corpus_deduplicates_pool():
    pool = ["AAAA", "CCCC", "AAAA", "GGGG", "CCCC"]
    split = split_corpus(pool, 2, 1, seed=0)
    picked = list(split.train) + list(split.test)
    assert len(set(picked)) == 3


def test_split_corpus_insufficient_pool():
    with pytest.raises(ValueError, match="distinct sequences"):
        split_corpus(["AAAA", "AAAA", "CCCC"], 2, 1, seed=0)


def test_split_corpus_negative_counts():
    with pytest.raises(ValueError, match=">= 0"):
        split_corpus(["AAAA"], -1, 0, seed=0)


def test_corpus_split_rejects_overlap():
    with pytest.raises(ValueError, match="overlap"):
        CorpusSplit(train=("AAAA",), test=("AAAA",), seed=0)


@given(
    n_pool=st.integers(5, 60),
    n_train=st.integers(0, 30),
    n_test=st.integers(0, 20),
    seed=st.integers(0, 2**31 - 1),
)
@settings(max_examples=60, deadline=None)
def test_split_corpus_disjoint_property(n_pool, n_train, n_test, seed):
    pool = generate_synthetic(n_pool, 8, 0.5, seed=seed % 1000)
    distinct = len(set(pool))
    if distinct < n_train + n_test:
        with pytest.raises(ValueError):
            split_corpus(pool, n_train, n_test, seed)
        return
    split = split_corpus(pool, n_train, n_test, seed)
    assert len(split.train) == n_train
    assert len(split.test) == n_test
    assert not set(split.train) & set(split.test)
