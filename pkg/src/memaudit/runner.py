"""Experiment orchestration: corpus, canaries, model, attacks, scores.

One cell is a (dataset, seed) pair. Every cell derives its own RNG streams
from the experiment seed plus the dataset name, so changing one seed in the
config changes only that seed's cells. Cell failures are recorded and the
remaining cells still run; failed cells are excluded from aggregates.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

from .attacks.extraction import extraction_report
from .attacks.membership import mia_report
from .attacks.perplexity import perplexity_report
from .canary import derive_plant_seed, generate_canaries, plant_canaries
from .config import ConfigError, ExperimentConfig
from .corpus import (
    generate_synthetic,
    load_fasta,
    load_prepared,
    split_corpus,
    window_genome,
)
from .detectability import FEATURE_NAMES, COMBINED_NAME, detectability_report
from .models import KgramModel, per_sequence_loss, train_kgram
from .protocol import RemoteScoredModel
from .scoring import (
    ConfigScore,
    ModelScore,
    VectorScores,
    aggregate_seeds,
    dominant_vector,
    s_config,
)


def derive_stream_seed(experiment_seed, dataset_name, stream):
    """Stable per-cell sub-seed for one named RNG stream."""
    tag = f"{stream}:{dataset_name}:{experiment_seed}"
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def build_pool(dataset, config):
    """Materialize the candidate sequence pool for one dataset spec."""
    if dataset.kind == "synthetic":
        return None  # drawn per seed in build_split
    if dataset.kind == "fasta":
        records = load_fasta(dataset.path)
        stride = dataset.window_stride or config.seq_len
        return window_genome(records, config.seq_len, stride)
    if dataset.kind == "prepared":
        return load_prepared(dataset.path, target_len=config.seq_len)
    raise ConfigError(f"unknown dataset kind {dataset.kind!r}")


def build_split(dataset, config, seed, pool=None):
    """Build the train/test split for one cell."""
    need = config.n_train + config.n_test
    if dataset.kind == "synthetic":
        pool = generate_synthetic(
            need,
            config.seq_len,
            dataset.gc_content,
            derive_stream_seed(seed, dataset.name, "gen"),
        )
    elif pool is None:
        pool = build_pool(dataset, config)
    return split_corpus(
        pool,
        config.n_train,
        config.n_test,
        derive_stream_seed(seed, dataset.name, "split"),
        source=dataset.name,
    )


def _remote_endpoint(template, dataset_name, seed):
    try:
        return template.format(dataset=dataset_name, seed=seed)
    except (KeyError, IndexError) as exc:
        raise ConfigError(
            f"model.endpoint template {template!r} has unknown placeholder: {exc}"
        ) from exc


def _make_model(config, dataset, seed, train_sequences):
    """Train or attach the model for one cell; returns (model, closer)."""
    spec = config.model
    if spec.kind == "kgram":
        model = train_kgram(train_sequences, order=spec.order, lam=spec.lam)
        return model, lambda: None
    endpoint = _remote_endpoint(spec.endpoint, dataset.name, seed)
    model = RemoteScoredModel(endpoint)
    return model, model.close


def _split_losses(model, split, canary_set):
    """Per-sequence losses for the three splits, batched when supported."""
    batch = getattr(model, "score_batch", None)

    def score(seqs):
        if batch is not None:
            return [-lp / len(s) for lp, s in zip(batch(seqs), seqs)]
        return [per_sequence_loss(model, s) for s in seqs]

    return {
        "train": score(list(split.train)),
        "test": score(list(split.test)),
        "canary": score([c.seq for c in canary_set.canaries]),
    }


@dataclass
class CellResult:
    """Everything measured for one (dataset, seed) cell."""

    dataset: str
    seed: int
    error: str = None
    scores: VectorScores = None
    dominant: str = None
    perplexity: object = None
    mia: object = None
    extraction: object = None
    losses: dict = None
    timing: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.error is None


@dataclass
class AuditResult:
    config: ExperimentConfig
    cells: list
    config_scores: dict  # dataset name -> ConfigScore (succeeded seeds only)
    model_score: ModelScore  # None when every cell failed

    @property
    def failed_cells(self):
        return [c for c in self.cells if not c.ok]

    @property
    def ok(self):
        return not self.failed_cells


def run_cell(config, dataset, seed, *, pool=None, save_model_path=None):
    """Run the full attack battery for one cell."""
    timing = {}
    t0 = time.perf_counter()
    split = build_split(dataset, config, seed, pool=pool)
    canary_set = generate_canaries(
        config.canary.n, config.canary.length, config.canary.tiers, seed
    )
    augmented = plant_canaries(split, canary_set, derive_plant_seed(seed))
    timing["corpus"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    model, closer = _make_model(config, dataset, seed, augmented.sequences)
    timing["model"] = time.perf_counter() - t0
    try:
        if save_model_path is not None and isinstance(model, KgramModel):
            model.save(save_model_path)

        t0 = time.perf_counter()
        losses = _split_losses(model, split, canary_set)
        ppl = perplexity_report(model, split, canary_set, losses=losses)
        timing["ppl"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        mia = mia_report(model, split, losses=losses)
        timing["mia"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        ext = extraction_report(
            model,
            canary_set,
            prefix_len=config.attack.prefix_len,
            max_candidates=config.attack.max_candidates,
            mode=config.attack.search,
            beam_width=config.attack.beam_width,
        )
        timing["ext"] = time.perf_counter() - t0
    finally:
        closer()

    scores = VectorScores(s_ppl=ppl.s_ppl, s_ext=ext.s_ext, s_mia=mia.s_mia)
    return CellResult(
        dataset=dataset.name,
        seed=seed,
        scores=scores,
        dominant=dominant_vector(scores),
        perplexity=ppl,
        mia=mia,
        extraction=ext,
        losses=losses,
        timing=timing,
    )


def run_audit(config, *, progress=None, save_models_dir=None):
    """Run every (dataset, seed) cell and aggregate the scores.

    Args:
        config: ExperimentConfig.
        progress: optional callable(str) for status lines.
        save_models_dir: optional directory; trained k-gram models are
            written there as model-<dataset>-<seed>.json for reuse behind
            remote adapters.

    Returns:
        AuditResult. Per-cell failures are recorded on the cell and the
        run continues; the result's ok flag is False if any cell failed.
    """
    if not isinstance(config, ExperimentConfig):
        raise TypeError("config must be an ExperimentConfig")
    if save_models_dir is not None:
        Path(save_models_dir).mkdir(parents=True, exist_ok=True)
    cells = []
    for dataset in config.datasets:
        try:
            pool = build_pool(dataset, config)
        except Exception as exc:
            # a dead corpus source fails all of this dataset's cells, the
            # other datasets still run
            for seed in config.seeds:
                if progress is not None:
                    progress(f"cell {dataset.name} seed {seed} FAILED: {exc}")
                cells.append(
                    CellResult(dataset=dataset.name, seed=seed, error=str(exc))
                )
            continue
        for seed in config.seeds:
            if progress is not None:
                progress(f"cell {dataset.name} seed {seed}")
            save_path = None
            if save_models_dir is not None:
                save_path = f"{save_models_dir}/model-{dataset.name}-{seed}.json"
            try:
                cell = run_cell(
                    config, dataset, seed, pool=pool, save_model_path=save_path
                )
            except Exception as exc:
                cell = CellResult(dataset=dataset.name, seed=seed, error=str(exc))
                if progress is not None:
                    progress(f"cell {dataset.name} seed {seed} FAILED: {exc}")
            cells.append(cell)

    config_scores = {}
    for dataset in config.datasets:
        good = [c for c in cells if c.dataset == dataset.name and c.ok]
        if not good:
            continue
        config_scores[dataset.name] = ConfigScore.from_cells(
            dataset.name,
            {c.seed: s_config(c.scores) for c in good},
            {c.seed: c.dominant for c in good},
        )

    per_seed_lists = {}
    for cell in cells:
        if cell.ok:
            per_seed_lists.setdefault(cell.seed, []).append(s_config(cell.scores))
    model_score = (
        ModelScore.from_config_scores(per_seed_lists) if per_seed_lists else None
    )
    return AuditResult(
        config=config,
        cells=cells,
        config_scores=config_scores,
        model_score=model_score,
    )


@dataclass
class DetectabilityRun:
    """Detectability reports for every cell plus per-dataset aggregates."""

    per_cell: dict  # dataset name -> {seed -> DetectabilityReport}
    aggregates: list  # (dataset, feature, auc_mean, auc_std, trivial_any) rows


def run_detectability(config, *, folds=5):
    """Run the canary detectability audit over every (dataset, seed) cell.

    Aggregate rows follow the feature order (7 features then the combined
    detector) within each dataset; mean and std are across seeds, std with
    divisor n. A row is flagged when any seed's AUC separates trivially.
    """
    if not isinstance(config, ExperimentConfig):
        raise TypeError("config must be an ExperimentConfig")
    per_cell = {}
    for dataset in config.datasets:
        pool = build_pool(dataset, config)
        reports = {}
        for seed in config.seeds:
            split = build_split(dataset, config, seed, pool=pool)
            canary_set = generate_canaries(
                config.canary.n, config.canary.length, config.canary.tiers, seed
            )
            reports[seed] = detectability_report(
                split, canary_set, folds=folds, seed=seed
            )
        per_cell[dataset.name] = reports

    aggregates = []
    names = FEATURE_NAMES + (COMBINED_NAME,)
    for dataset in config.datasets:
        reports = per_cell[dataset.name]
        for feature in names:
            aucs = [reports[seed].auc_of(feature) for seed in config.seeds]
            mean, std = aggregate_seeds(aucs)
            trivial = any(
                row.trivial_separator
                for seed in config.seeds
                for row in reports[seed].rows
                if row.feature == feature
            )
            aggregates.append((dataset.name, feature, mean, std, trivial))
    return DetectabilityRun(per_cell=per_cell, aggregates=aggregates)
