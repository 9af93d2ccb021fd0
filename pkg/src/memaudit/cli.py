"""Command line front ends: the audit driver and the adapter probe."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .protocol import AdapterError, RemoteScoredModel
from .report import (
    ReportError,
    detectability_csv,
    detectability_to_dict,
    extraction_curves_csv,
    load_report,
    perplexity_csv,
    render_report,
    roc_csv,
    scores_csv,
    write_report,
)
from .runner import run_audit, run_detectability


def _write(path, text):
    Path(path).write_text(text)


def _cmd_run(args):
    config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    progress = None if args.quiet else lambda msg: print(msg, file=sys.stderr)
    result = run_audit(config, progress=progress, save_models_dir=args.save_models)
    doc = write_report(result, out / "report.json")
    _write(out / "scores.csv", scores_csv(doc))
    _write(out / "extraction_curves.csv", extraction_curves_csv(doc))
    _write(out / "perplexity.csv", perplexity_csv(doc))
    _write(out / "roc.csv", roc_csv(doc))

    from .figures import render_extraction_curves, render_roc_curves, render_sconfig_bars

    render_extraction_curves(doc, out / "extraction_curves.png")
    render_roc_curves(doc, out / "roc_curves.png")
    render_sconfig_bars(doc, out / "sconfig_per_seed.png")

    if args.detectability:
        det = run_detectability(config)
        _write(out / "detectability.csv", detectability_csv(det))
        _write(
            out / "detectability.json",
            json.dumps(detectability_to_dict(det), indent=2) + "\n",
        )
        from .figures import render_detectability

        render_detectability(det, out / "detectability_auc.png")

    print(render_report(doc), end="")
    return 0 if result.ok else 1


def _cmd_detectability(args):
    config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    det = run_detectability(config, folds=args.folds)
    _write(out / "detectability.csv", detectability_csv(det))
    _write(
        out / "detectability.json",
        json.dumps(detectability_to_dict(det), indent=2) + "\n",
    )
    from .figures import render_detectability

    render_detectability(det, out / "detectability_auc.png")
    for dataset, feature, mean, std, trivial in det.aggregates:
        flag = "  TRIVIAL" if trivial else ""
        print(f"{dataset:<16}{feature:<28}{mean:.3f} +/- {std:.3f}{flag}")
    return 0


def _cmd_report(args):
    doc = load_report(args.report)
    print(render_report(doc), end="")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="audit",
        description="Quantify memorization risk in genomic sequence models.",
    )
    parser.add_argument("--version", action="version", version=f"memaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full audit matrix")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument(
        "--detectability",
        action="store_true",
        help="also run the canary detectability audit",
    )
    p_run.add_argument(
        "--save-models",
        metavar="DIR",
        help="write trained k-gram models here, one file per cell",
    )
    p_run.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p_run.set_defaults(fn=_cmd_run)

    p_det = sub.add_parser("detectability", help="run only the detectability audit")
    p_det.add_argument("--config", required=True, help="experiment config JSON")
    p_det.add_argument("--out", required=True, help="output directory")
    p_det.add_argument("--folds", type=int, default=5, help="CV folds (default 5)")
    p_det.set_defaults(fn=_cmd_detectability)

    p_rep = sub.add_parser("report", help="render a report.json to text")
    p_rep.add_argument("report", help="path to report.json")
    p_rep.set_defaults(fn=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def adapter_main(argv=None):
    parser = argparse.ArgumentParser(
        prog="adapter", description="Adapter protocol utilities."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_probe = sub.add_parser("probe", help="handshake and smoke-score an endpoint")
    p_probe.add_argument(
        "--endpoint",
        required=True,
        help="adapter command line, or tcp:host:port",
    )
    p_probe.add_argument("--timeout", type=float, default=30.0)

    args = parser.parse_args(argv)
    try:
        with RemoteScoredModel(args.endpoint, timeout=args.timeout) as model:
            print(json.dumps(model.info, indent=2))
            print(f"score(ACGT) = {model.sequence_log_prob('ACGT')}")
            dist = model.next_dist("")
            print(f"next_dist('') = {list(dist)}")
    except AdapterError as exc:
        print(f"probe failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
