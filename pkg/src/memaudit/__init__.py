"""memaudit: quantify memorization and privacy risk in genomic sequence models.

Plant canary sequences into a training corpus, train or attach a scored
model, run three attack vectors (perplexity gap, canary extraction,
membership inference), and aggregate worst-case vulnerability scores.
"""

__version__ = "0.1.0"

from .canary import Canary, CanarySet, generate_canaries, plant_canaries
from .config import ExperimentConfig, load_config
from .corpus import (
    CorpusSplit,
    generate_synthetic,
    load_fasta,
    load_prepared,
    parse_fasta,
    split_corpus,
    window_genome,
)
from .models import KgramModel, ScoredModel, UniformModel, perplexity, train_kgram
from .protocol import RemoteScoredModel, serve_model
from .runner import run_audit, run_cell, run_detectability
from .scoring import (
    VectorScores,
    aggregate_seeds,
    dominant_vector,
    s_config,
    s_mia_from_auc,
    s_model,
    s_ppl_from_means,
)

__all__ = [
    "__version__",
    "Canary",
    "CanarySet",
    "CorpusSplit",
    "ExperimentConfig",
    "KgramModel",
    "RemoteScoredModel",
    "ScoredModel",
    "UniformModel",
    "VectorScores",
    "aggregate_seeds",
    "dominant_vector",
    "generate_canaries",
    "generate_synthetic",
    "load_config",
    "load_fasta",
    "load_prepared",
    "parse_fasta",
    "perplexity",
    "plant_canaries",
    "run_audit",
    "run_cell",
    "run_detectability",
    "s_config",
    "s_mia_from_auc",
    "s_model",
    "s_ppl_from_means",
    "serve_model",
    "split_corpus",
    "train_kgram",
    "window_genome",
]
