"""Render report figures to PNG files (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .attacks.membership import mia_from_losses, roc_points
from .detectability import FEATURE_NAMES, COMBINED_NAME


def _ok_cells(doc):
    return [c for c in doc["cells"] if "error" not in c]


def render_extraction_curves(doc, path):
    """Per-dataset extraction success against repetition tier, seed-averaged."""
    series = {}
    for cell in _ok_cells(doc):
        for entry in cell["extraction"]["per_tier"]:
            series.setdefault(cell["dataset"], {}).setdefault(
                entry["tier"], []
            ).append(entry["success_rate"])
    fig, ax = plt.subplots(figsize=(6, 4))
    for dataset, tiers in series.items():
        xs = sorted(tiers)
        ys = [sum(tiers[t]) / len(tiers[t]) for t in xs]
        ax.plot(xs, ys, marker="o", label=dataset)
    ax.set_xlabel("repetition tier")
    ax.set_ylabel("extraction success rate")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.3)
    if series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_roc_curves(doc, path):
    """Membership ROC per cell, recomputed from the stored losses."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for cell in _ok_cells(doc):
        mia = mia_from_losses(cell["losses"]["train"], cell["losses"]["test"])
        pts = roc_points(mia.member_scores, mia.nonmember_scores)
        fpr = [p[0] for p in pts]
        tpr = [p[1] for p in pts]
        ax.plot(fpr, tpr, lw=1, label=f"{cell['dataset']}/{cell['seed']}")
    ax.plot([0, 1], [0, 1], ls="--", c="gray", lw=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if _ok_cells(doc):
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_sconfig_bars(doc, path):
    """Grouped bars of per-seed worst-case scores per dataset."""
    cells = _ok_cells(doc)
    datasets = list(dict.fromkeys(c["dataset"] for c in cells))
    seeds = list(dict.fromkeys(c["seed"] for c in cells))
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / max(1, len(seeds))
    x = np.arange(len(datasets))
    for i, seed in enumerate(seeds):
        ys = []
        for dataset in datasets:
            match = [
                c["scores"]["s_config"]
                for c in cells
                if c["dataset"] == dataset and c["seed"] == seed
            ]
            ys.append(match[0] if match else 0.0)
        ax.bar(x + i * width, ys, width, label=f"seed {seed}")
    ax.set_xticks(x + width * (len(seeds) - 1) / 2)
    ax.set_xticklabels(datasets, rotation=20, ha="right")
    ax.set_ylabel("S_config")
    ax.set_ylim(0, 1.05)
    if seeds:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_detectability(run, path):
    """Seed-averaged detector AUC per feature, grouped by dataset."""
    names = list(FEATURE_NAMES) + [COMBINED_NAME]
    datasets = list(run.per_cell)
    means = {
        (dataset, feature): mean
        for dataset, feature, mean, _std, _triv in run.aggregates
    }
    fig, ax = plt.subplots(figsize=(8, 4))
    width = 0.8 / max(1, len(datasets))
    x = np.arange(len(names))
    for i, dataset in enumerate(datasets):
        ys = [means.get((dataset, f), 0.0) for f in names]
        ax.bar(x + i * width, ys, width, label=dataset)
    ax.axhline(0.5, ls="--", c="gray", lw=1)
    ax.set_xticks(x + width * (len(datasets) - 1) / 2)
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("detector AUC")
    ax.set_ylim(0, 1.0)
    if datasets:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
