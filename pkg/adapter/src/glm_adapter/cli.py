"""Command line entry: glm-adapter serve --model <id|mock> --transport ..."""

import argparse
import sys

from . import __version__
from .backends import BackendError
from .config import AdapterConfig, parse_alphabet
from .server import serve


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="glm-adapter",
        description="Serve a genomic language model over the audit wire protocol.",
    )
    parser.add_argument(
        "--version", action="version", version=f"glm-adapter {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="answer scoring requests until shutdown")
    p_serve.add_argument(
        "--model",
        required=True,
        help='"mock", a saved k-gram model file, or a transformer id/path',
    )
    p_serve.add_argument(
        "--transport",
        default="stdio",
        help='"stdio" (default) or "tcp:PORT" (0 picks a free port)',
    )
    p_serve.add_argument("--device", default="cpu", help="device hint for transformer models")
    p_serve.add_argument(
        "--max-batch", type=int, default=64, help="internal scoring batch size"
    )
    p_serve.add_argument(
        "--alphabet",
        default=None,
        help='remap wire symbols for the model vocabulary, e.g. "A=a,C=c,G=g,T=t"',
    )
    args = parser.parse_args(argv)

    try:
        alphabet = parse_alphabet(args.alphabet) if args.alphabet else None
        kwargs = {"alphabet": alphabet} if alphabet is not None else {}
        config = AdapterConfig(
            model=args.model,
            device=args.device,
            max_batch=args.max_batch,
            **kwargs,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return serve(config, args.transport)
    except BackendError as exc:
        # startup failure: the auditor treats a dead child as a failed cell
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
