"""Adapter process configuration."""

from dataclasses import dataclass, field

from .wire import ALPHABET

IDENTITY_ALPHABET = {sym: sym for sym in ALPHABET}


def parse_alphabet(text):
    """Parse a "A=a,C=c,G=g,T=t" remap string into a dict."""
    mapping = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"alphabet entry {part!r} is not KEY=VALUE")
        mapping[key.strip()] = value.strip()
    return mapping


@dataclass
class AdapterConfig:
    """What to serve and how.

    model is "mock", a saved k-gram model file, or a transformer model
    id or directory. alphabet maps the wire symbols to whatever strings
    the wrapped model's vocabulary wants; the mock and k-gram backends
    are ACGT-native and ignore it.
    """

    model: str
    device: str = "cpu"
    max_batch: int = 64
    alphabet: dict = field(default_factory=lambda: dict(IDENTITY_ALPHABET))

    def __post_init__(self):
        if not isinstance(self.model, str) or not self.model:
            raise ValueError("model must be a non-empty string")
        if not isinstance(self.device, str) or not self.device:
            raise ValueError("device must be a non-empty string")
        if isinstance(self.max_batch, bool) or not isinstance(self.max_batch, int):
            raise ValueError("max_batch must be an integer")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if set(self.alphabet) != set(ALPHABET):
            raise ValueError("alphabet must map exactly the symbols A, C, G, T")
        for sym, mapped in self.alphabet.items():
            if not isinstance(mapped, str) or not mapped:
                raise ValueError(f"alphabet entry for {sym!r} must be a non-empty string")
