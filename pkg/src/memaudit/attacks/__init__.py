"""Attack vectors: perplexity gap, canary extraction, membership inference."""

from .extraction import (
    ExtractionReport,
    ExtractionResult,
    enumerate_top_candidates,
    extract_canary,
    extraction_report,
)
from .membership import (
    GaussianFit,
    MiaResult,
    auc_roc,
    fit_gaussian,
    lira_score,
    mia_report,
    roc_points,
)
from .perplexity import PerplexityTable, perplexity_report

__all__ = [
    "ExtractionReport",
    "ExtractionResult",
    "enumerate_top_candidates",
    "extract_canary",
    "extraction_report",
    "GaussianFit",
    "MiaResult",
    "auc_roc",
    "fit_gaussian",
    "lira_score",
    "mia_report",
    "roc_points",
    "PerplexityTable",
    "perplexity_report",
]
