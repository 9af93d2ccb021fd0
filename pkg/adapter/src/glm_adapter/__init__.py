"""glm_adapter: serve genomic language models to a sequence auditor.

A small standalone process that answers score and next-distribution
requests over newline-delimited JSON, on stdio or TCP. Three backends:
a uniform mock for protocol conformance tests, an evaluator for saved
k-gram model files, and a wrapper around transformer checkpoints (the
``hf`` extra). The adapter owns tokenization entirely; the wire carries
raw ACGT text and scalar log probabilities, nothing else.
"""

__version__ = "0.1.0"

from .backends import BackendError, KgramEvaluator, MockUniform, load_backend
from .config import AdapterConfig, parse_alphabet
from .server import serve, serve_session

__all__ = [
    "__version__",
    "AdapterConfig",
    "BackendError",
    "KgramEvaluator",
    "MockUniform",
    "load_backend",
    "parse_alphabet",
    "serve",
    "serve_session",
]
