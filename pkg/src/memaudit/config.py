"""Experiment configuration: schema, defaults, validation, content hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

CONFIG_VERSION = 1

DEFAULT_SEEDS = (42, 123, 456)
DEFAULT_TIERS = ((1, 25), (5, 25), (10, 25), (20, 25))


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _as_int(value, name, minimum=None):
    _require(
        isinstance(value, int) and not isinstance(value, bool),
        f"{name} must be an integer",
    )
    if minimum is not None:
        _require(value >= minimum, f"{name} must be >= {minimum}")
    return value


def _as_float(value, name, low=None, high=None):
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        f"{name} must be a number",
    )
    value = float(value)
    if low is not None:
        _require(value >= low, f"{name} must be >= {low}")
    if high is not None:
        _require(value <= high, f"{name} must be <= {high}")
    return value


@dataclass(frozen=True)
class DatasetSpec:
    """One corpus source: synthetic draws, a FASTA file, or prepared lines."""

    name: str
    kind: str
    gc_content: float = 0.5
    path: str | None = None
    window_stride: int | None = None

    @staticmethod
    def from_dict(d, index):
        _require(isinstance(d, dict), f"datasets[{index}] must be an object")
        kind = d.get("kind")
        _require(
            kind in ("synthetic", "fasta", "prepared"),
            f"datasets[{index}].kind must be synthetic, fasta or prepared",
        )
        name = d.get("name", kind)
        _require(isinstance(name, str) and name, f"datasets[{index}].name must be a non-empty string")
        gc = _as_float(d.get("gc_content", 0.5), f"datasets[{index}].gc_content", 0.0, 1.0)
        path = d.get("path")
        stride = d.get("window_stride")
        if kind == "synthetic":
            _require(path is None, f"datasets[{index}]: synthetic takes no path")
        else:
            _require(
                isinstance(path, str) and path,
                f"datasets[{index}].path is required for kind {kind}",
            )
        if stride is not None:
            _require(kind == "fasta", f"datasets[{index}]: window_stride only applies to fasta")
            stride = _as_int(stride, f"datasets[{index}].window_stride", 1)
        return DatasetSpec(name=name, kind=kind, gc_content=gc, path=path, window_stride=stride)

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind}
        if self.kind == "synthetic":
            d["gc_content"] = self.gc_content
        else:
            d["path"] = self.path
            if self.window_stride is not None:
                d["window_stride"] = self.window_stride
        return d


@dataclass(frozen=True)
class CanarySpec:
    n: int = 100
    length: int = 64
    tiers: tuple = DEFAULT_TIERS

    @staticmethod
    def from_dict(d):
        _require(isinstance(d, dict), "canary must be an object")
        n = _as_int(d.get("n", 100), "canary.n", 1)
        length = _as_int(d.get("length", 64), "canary.length", 2)
        raw_tiers = d.get("tiers", [list(t) for t in DEFAULT_TIERS])
        _require(
            isinstance(raw_tiers, list) and raw_tiers,
            "canary.tiers must be a non-empty list",
        )
        tiers = []
        for i, pair in enumerate(raw_tiers):
            _require(
                isinstance(pair, (list, tuple)) and len(pair) == 2,
                f"canary.tiers[{i}] must be a [repetitions, count] pair",
            )
            reps = _as_int(pair[0], f"canary.tiers[{i}][0]", 1)
            count = _as_int(pair[1], f"canary.tiers[{i}][1]", 1)
            tiers.append((reps, count))
        _require(
            sum(c for _, c in tiers) == n,
            "canary.tiers counts must sum to canary.n",
        )
        _require(
            len({r for r, _ in tiers}) == len(tiers),
            "canary.tiers repetition levels must be distinct",
        )
        return CanarySpec(n=n, length=length, tiers=tuple(tiers))

    def to_dict(self):
        return {"n": self.n, "length": self.length, "tiers": [list(t) for t in self.tiers]}


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "kgram"
    order: int = 6
    lam: float = 1.0
    endpoint: str | None = None

    @staticmethod
    def from_dict(d):
        _require(isinstance(d, dict), "model must be an object")
        kind = d.get("kind", "kgram")
        _require(kind in ("kgram", "remote"), "model.kind must be kgram or remote")
        if kind == "remote":
            endpoint = d.get("endpoint")
            _require(
                isinstance(endpoint, str) and endpoint,
                "model.endpoint is required for remote models",
            )
            return ModelSpec(kind=kind, endpoint=endpoint)
        order = _as_int(d.get("order", 6), "model.order", 1)
        lam = _as_float(d.get("lam", 1.0), "model.lam")
        _require(lam > 0.0, "model.lam must be > 0")
        return ModelSpec(kind=kind, order=order, lam=lam)

    def to_dict(self):
        if self.kind == "remote":
            return {"kind": "remote", "endpoint": self.endpoint}
        return {"kind": "kgram", "order": self.order, "lam": self.lam}


@dataclass(frozen=True)
class AttackSpec:
    prefix_len: int = 32
    max_candidates: int = 1000
    search: str = "exact"
    beam_width: int = 10

    @staticmethod
    def from_dict(d):
        _require(isinstance(d, dict), "attack must be an object")
        prefix_len = _as_int(d.get("prefix_len", 32), "attack.prefix_len", 1)
        max_candidates = _as_int(d.get("max_candidates", 1000), "attack.max_candidates", 1)
        search = d.get("search", "exact")
        _require(search in ("exact", "beam"), "attack.search must be exact or beam")
        beam_width = _as_int(d.get("beam_width", 10), "attack.beam_width", 1)
        return AttackSpec(
            prefix_len=prefix_len,
            max_candidates=max_candidates,
            search=search,
            beam_width=beam_width,
        )

    def to_dict(self):
        return {
            "prefix_len": self.prefix_len,
            "max_candidates": self.max_candidates,
            "search": self.search,
            "beam_width": self.beam_width,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Full audit experiment description.

    The content hash covers the canonical dict form, so two configs that
    render to the same JSON hash identically regardless of key order or
    whitespace in the source file.
    """

    datasets: tuple
    n_train: int = 1000
    n_test: int = 200
    seq_len: int = 256
    canary: CanarySpec = field(default_factory=CanarySpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    attack: AttackSpec = field(default_factory=AttackSpec)
    seeds: tuple = DEFAULT_SEEDS

    @staticmethod
    def from_dict(d):
        _require(isinstance(d, dict), "config must be a JSON object")
        version = d.get("version", CONFIG_VERSION)
        _require(version == CONFIG_VERSION, f"unsupported config version {version!r}")
        raw_datasets = d.get("datasets")
        _require(
            isinstance(raw_datasets, list) and raw_datasets,
            "datasets must be a non-empty list",
        )
        datasets = tuple(
            DatasetSpec.from_dict(item, i) for i, item in enumerate(raw_datasets)
        )
        names = [ds.name for ds in datasets]
        _require(len(set(names)) == len(names), "dataset names must be distinct")
        n_train = _as_int(d.get("n_train", 1000), "n_train", 1)
        n_test = _as_int(d.get("n_test", 200), "n_test", 1)
        seq_len = _as_int(d.get("seq_len", 256), "seq_len", 2)
        canary = CanarySpec.from_dict(d.get("canary", {}))
        model = ModelSpec.from_dict(d.get("model", {}))
        attack = AttackSpec.from_dict(d.get("attack", {}))
        _require(
            attack.prefix_len < canary.length,
            "attack.prefix_len must be smaller than canary.length",
        )
        raw_seeds = d.get("seeds", list(DEFAULT_SEEDS))
        _require(isinstance(raw_seeds, list) and raw_seeds, "seeds must be a non-empty list")
        seeds = tuple(_as_int(s, f"seeds[{i}]", 0) for i, s in enumerate(raw_seeds))
        _require(len(set(seeds)) == len(seeds), "seeds must be distinct")
        return ExperimentConfig(
            datasets=datasets,
            n_train=n_train,
            n_test=n_test,
            seq_len=seq_len,
            canary=canary,
            model=model,
            attack=attack,
            seeds=seeds,
        )

    def to_dict(self):
        return {
            "version": CONFIG_VERSION,
            "datasets": [ds.to_dict() for ds in self.datasets],
            "n_train": self.n_train,
            "n_test": self.n_test,
            "seq_len": self.seq_len,
            "canary": self.canary.to_dict(),
            "model": self.model.to_dict(),
            "attack": self.attack.to_dict(),
            "seeds": list(self.seeds),
        }

    def content_hash(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def load_config(path):
    """Read a config file; dataset paths resolve relative to its directory."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    config = ExperimentConfig.from_dict(raw)
    base = path.resolve().parent
    resolved = []
    for ds in config.datasets:
        if ds.path is not None and not Path(ds.path).is_absolute():
            ds = DatasetSpec(
                name=ds.name,
                kind=ds.kind,
                gc_content=ds.gc_content,
                path=str(base / ds.path),
                window_stride=ds.window_stride,
            )
        resolved.append(ds)
    return ExperimentConfig(
        datasets=tuple(resolved),
        n_train=config.n_train,
        n_test=config.n_test,
        seq_len=config.seq_len,
        canary=config.canary,
        model=config.model,
        attack=config.attack,
        seeds=config.seeds,
    )
