"""Request loop: one session, sequential handling, per-request faults.

A scoring error answers with an error frame and the session continues;
only shutdown or a closed input ends the loop. Ids must be strictly
increasing; a rejected request does not advance the watermark.
"""

import socket
import sys

from .backends import load_backend
from .wire import (
    ALPHABET,
    PROTOCOL_VERSION,
    BadFrame,
    dump_response,
    parse_request,
    salvage_id,
)


def _score_batch(backend, seqs, max_batch):
    many = getattr(backend, "score_many", None)
    out = []
    for start in range(0, len(seqs), max_batch):
        chunk = seqs[start:start + max_batch]
        if many is not None:
            out.extend(many(chunk))
        else:
            out.extend(backend.score(s) for s in chunk)
    return out


def serve_session(backend, rfile, wfile, *, max_batch=64):
    """Answer frames from rfile on wfile until shutdown or EOF."""
    info = {
        "name": backend.info_name,
        "protocol": PROTOCOL_VERSION,
        "alphabet": ALPHABET,
        "score_batch": True,
    }
    bound = getattr(backend, "max_symbol_prob", None)
    if bound is not None:
        info["max_symbol_prob"] = float(bound)
    last_id = 0
    for raw in rfile:
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        try:
            request = parse_request(line)
        except BadFrame as exc:
            wfile.write(dump_response(salvage_id(line), ok=False, error=str(exc)))
            wfile.flush()
            continue
        req_id = request["id"]
        if req_id <= last_id:
            wfile.write(
                dump_response(req_id, ok=False, error=f"id {req_id} not greater than {last_id}")
            )
            wfile.flush()
            continue
        last_id = req_id
        kind = request["kind"]
        payload = request["payload"]
        try:
            if kind == "handshake":
                response = dump_response(req_id, info=info)
            elif kind == "score_sequence":
                response = dump_response(req_id, log_prob=float(backend.score(payload)))
            elif kind == "next_dist":
                response = dump_response(
                    req_id, dist=[float(p) for p in backend.next_dist(payload)]
                )
            elif kind == "score_batch":
                response = dump_response(
                    req_id,
                    log_probs=[float(v) for v in _score_batch(backend, payload, max_batch)],
                )
            else:
                wfile.write(dump_response(req_id))
                wfile.flush()
                return
        except Exception as exc:  # fault isolation: the session survives
            response = dump_response(req_id, ok=False, error=str(exc))
        wfile.write(response)
        wfile.flush()


def serve(config, transport="stdio"):
    """Load the configured backend and serve it on the given transport.

    "stdio" answers on this process's own streams; "tcp:PORT" listens on
    127.0.0.1 for exactly one connection (port 0 picks a free port, the
    chosen one is printed to stderr as "listening PORT").
    """
    backend = load_backend(config)
    if transport == "stdio":
        serve_session(backend, sys.stdin, sys.stdout, max_batch=config.max_batch)
        return 0
    if isinstance(transport, str) and transport.startswith("tcp:"):
        try:
            port = int(transport[4:], 10)
        except ValueError:
            raise ValueError(f"bad TCP transport {transport!r}") from None
        server = socket.create_server(("127.0.0.1", port))
        try:
            print(f"listening {server.getsockname()[1]}", file=sys.stderr, flush=True)
            conn, _ = server.accept()
            with conn:
                rfile = conn.makefile("r", encoding="utf-8", newline="\n")
                wfile = conn.makefile("w", encoding="utf-8", newline="\n")
                serve_session(backend, rfile, wfile, max_batch=config.max_batch)
                wfile.close()
                rfile.close()
        finally:
            server.close()
        return 0
    raise ValueError(f"transport must be stdio or tcp:PORT, got {transport!r}")
