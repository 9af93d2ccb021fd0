"""Audit report serialization: JSON document, CSV exports, text rendering.

The JSON report is self-contained: it stores the raw per-sequence losses
and per-canary ranks, so every headline number can be recomputed from the
report alone. Two runs of the same config produce byte-identical JSON
except under "timing" keys.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from . import __version__
from .attacks.membership import mia_from_losses, roc_points
from .scoring import VECTOR_NAMES

REPORT_FORMAT = "audit-report"
REPORT_VERSION = 1


class ReportError(ValueError):
    """Unreadable or schema-incompatible report document."""


def _cell_to_dict(cell):
    d = {"dataset": cell.dataset, "seed": cell.seed}
    if not cell.ok:
        d["error"] = cell.error
        return d
    ppl = cell.perplexity
    mia = cell.mia
    ext = cell.extraction
    d["scores"] = {
        "s_ppl": cell.scores.s_ppl,
        "s_ext": cell.scores.s_ext,
        "s_mia": cell.scores.s_mia,
        "s_config": max(cell.scores.s_ppl, cell.scores.s_ext, cell.scores.s_mia),
        "dominant": cell.dominant,
    }
    d["perplexity"] = {
        "mean_train": ppl.mean_train,
        "mean_test": ppl.mean_test,
        "mean_canary": ppl.mean_canary,
        "per_tier_canary": {str(t): v for t, v in sorted(ppl.per_tier_canary.items())},
        "gap_ratio": ppl.gap_ratio,
        "s_ppl": ppl.s_ppl,
    }
    d["mia"] = {
        "auc": mia.auc,
        "s_mia": mia.s_mia,
        "fit_member": {"mu": mia.fit_member.mu, "sigma": mia.fit_member.sigma},
        "fit_nonmember": {
            "mu": mia.fit_nonmember.mu,
            "sigma": mia.fit_nonmember.sigma,
        },
    }
    d["extraction"] = {
        "s_ext": ext.s_ext,
        "per_tier": [
            {
                "tier": t,
                "success_rate": ext.per_tier_success[t],
                "mean_exposure": ext.per_tier_mean_exposure[t],
            }
            for t in sorted(ext.per_tier_success)
        ],
        "results": [
            {
                "canary_id": r.canary_id,
                "tier": r.tier,
                "prefix_len": r.prefix_len,
                "suffix_len": r.suffix_len,
                "rank": r.rank,
                "rank_is_lower_bound": r.rank_is_lower_bound,
                "exposure_bits": r.exposure_bits,
                "success": r.success,
            }
            for r in ext.results
        ],
    }
    d["losses"] = cell.losses
    d["timing"] = cell.timing
    return d


def report_to_dict(result):
    """Serialize an AuditResult to the report document."""
    doc = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "tool": {"name": "memaudit", "version": __version__},
        "config": result.config.to_dict(),
        "config_hash": result.config.content_hash(),
        "cells": [_cell_to_dict(c) for c in result.cells],
        "config_scores": {
            name: {
                "per_seed": {str(s): v for s, v in sorted(cs.per_seed.items())},
                "dominant": {str(s): v for s, v in sorted(cs.dominant.items())},
                "mean": cs.mean,
                "std": cs.std,
            }
            for name, cs in result.config_scores.items()
        },
        "model_score": None
        if result.model_score is None
        else {
            "per_seed": {
                str(s): v for s, v in sorted(result.model_score.per_seed.items())
            },
            "mean": result.model_score.mean,
            "std": result.model_score.std,
        },
    }
    return doc


def write_report(result, path):
    doc = report_to_dict(result)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    return doc


def load_report(path):
    """Read and schema-check a report document."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise ReportError(f"{path}: not an {REPORT_FORMAT} document")
    if doc.get("version") != REPORT_VERSION:
        raise ReportError(
            f"{path}: unsupported report version {doc.get('version')!r}"
        )
    return doc


def strip_timing(obj):
    """Deep copy with every 'timing' key removed, for determinism compares."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "timing"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


# --- CSV exports ---


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _ok_cells(doc):
    return [c for c in doc["cells"] if "error" not in c]


def scores_csv(doc):
    """Worst-case score table: per-cell rows, per-dataset and MODEL rows."""
    rows = [["dataset", "seed", "s_ppl", "s_ext", "s_mia", "s_config", "dominant"]]
    by_dataset = {}
    for cell in _ok_cells(doc):
        s = cell["scores"]
        rows.append(
            [
                cell["dataset"],
                cell["seed"],
                s["s_ppl"],
                s["s_ext"],
                s["s_mia"],
                s["s_config"],
                s["dominant"],
            ]
        )
        by_dataset.setdefault(cell["dataset"], []).append(s)
    for name, agg in doc["config_scores"].items():
        cells = by_dataset.get(name, [])
        n = len(cells)
        if n:
            means = {
                k: sum(c[k] for c in cells) / n for k in ("s_ppl", "s_ext", "s_mia")
            }
            rows.append(
                [
                    name,
                    "mean",
                    means["s_ppl"],
                    means["s_ext"],
                    means["s_mia"],
                    agg["mean"],
                    "",
                ]
            )
        rows.append([name, "std", "", "", "", agg["std"], ""])
    model = doc.get("model_score")
    if model is not None:
        for seed, value in model["per_seed"].items():
            rows.append(["MODEL", seed, "", "", "", value, ""])
        rows.append(["MODEL", "mean", "", "", "", model["mean"], ""])
        rows.append(["MODEL", "std", "", "", "", model["std"], ""])
    return _csv_text(rows)


def extraction_curves_csv(doc):
    """Per-tier extraction series: one row per (dataset, seed, tier)."""
    rows = [["dataset", "seed", "tier", "success_rate", "mean_exposure"]]
    for cell in _ok_cells(doc):
        for entry in cell["extraction"]["per_tier"]:
            rows.append(
                [
                    cell["dataset"],
                    cell["seed"],
                    entry["tier"],
                    entry["success_rate"],
                    entry["mean_exposure"],
                ]
            )
    return _csv_text(rows)


def perplexity_csv(doc):
    """Split perplexities and gap ratio: one row per (dataset, seed)."""
    rows = [["dataset", "seed", "train", "test", "canary", "gap_ratio", "s_ppl"]]
    for cell in _ok_cells(doc):
        p = cell["perplexity"]
        rows.append(
            [
                cell["dataset"],
                cell["seed"],
                p["mean_train"],
                p["mean_test"],
                p["mean_canary"],
                p["gap_ratio"],
                p["s_ppl"],
            ]
        )
    return _csv_text(rows)


def roc_csv(doc):
    """Membership ROC curves recomputed from the stored raw losses."""
    rows = [["dataset", "seed", "fpr", "tpr"]]
    for cell in _ok_cells(doc):
        mia = mia_from_losses(cell["losses"]["train"], cell["losses"]["test"])
        for fpr, tpr in roc_points(mia.member_scores, mia.nonmember_scores):
            rows.append([cell["dataset"], cell["seed"], fpr, tpr])
    return _csv_text(rows)


def detectability_csv(run):
    """Table of per-feature detector AUCs aggregated across seeds."""
    rows = [["dataset", "feature", "auc_mean", "auc_std"]]
    for dataset, feature, mean, std, _trivial in run.aggregates:
        rows.append([dataset, feature, mean, std])
    return _csv_text(rows)


def detectability_to_dict(run):
    return {
        "format": "detectability-report",
        "version": 1,
        "cells": {
            dataset: {
                str(seed): {
                    "rows": [
                        {
                            "feature": row.feature,
                            "auc": row.auc,
                            "trivial_separator": row.trivial_separator,
                        }
                        for row in report.rows
                    ],
                    "n_train": report.n_train,
                    "n_canary_rows": report.n_canary_rows,
                }
                for seed, report in seeds.items()
            }
            for dataset, seeds in run.per_cell.items()
        },
        "aggregates": [
            {
                "dataset": dataset,
                "feature": feature,
                "auc_mean": mean,
                "auc_std": std,
                "trivial_separator": trivial,
            }
            for dataset, feature, mean, std, trivial in run.aggregates
        ],
    }


# --- text rendering ---


def _fmt(value, width=6):
    return f"{value:+.2f}".rjust(width) if value < 0 else f"{value:.2f}".rjust(width)


def render_report(doc):
    """Render the score grid; the per-seed dominant vector is starred."""
    cells = _ok_cells(doc)
    lines = []
    lines.append(f"memaudit report  (config {doc['config_hash'][:12]})")
    failed = [c for c in doc["cells"] if "error" in c]
    if not doc["cells"]:
        return "no cells\n"
    header = f"{'dataset':<16}{'seed':>6}  {'s_ppl':>7}{'s_ext':>7}{'s_mia':>7}  {'S_config':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for cell in cells:
        s = cell["scores"]
        cols = []
        for name in VECTOR_NAMES:
            mark = "*" if s["dominant"] == name else " "
            cols.append(_fmt(s[f"s_{name}"]) + mark)
        lines.append(
            f"{cell['dataset']:<16}{cell['seed']:>6}  "
            + "".join(cols)
            + f"  {_fmt(s['s_config'], 8)}"
        )
    for cell in failed:
        lines.append(f"{cell['dataset']:<16}{cell['seed']:>6}  FAILED: {cell['error']}")
    lines.append("-" * len(header))
    for name, agg in doc["config_scores"].items():
        lines.append(
            f"{name:<16}{'agg':>6}  S_config = {agg['mean']:.2f} +/- {agg['std']:.2f}"
        )
    model = doc.get("model_score")
    if model is not None:
        per_seed = "  ".join(f"{s}:{v:.2f}" for s, v in model["per_seed"].items())
        lines.append(
            f"{'MODEL':<16}{'agg':>6}  S_model  = {model['mean']:.2f} +/- {model['std']:.2f}  ({per_seed})"
        )
    return "\n".join(lines) + "\n"
