"""Frame grammar for the v1 scoring protocol.

One JSON object per newline-terminated line. Requests:

    {"id": 1, "kind": "handshake", "payload": null}
    {"id": 2, "kind": "score_sequence", "payload": "ACGT"}
    {"id": 3, "kind": "next_dist", "payload": ""}
    {"id": 4, "kind": "score_batch", "payload": ["AC", "GT"]}
    {"id": 5, "kind": "shutdown", "payload": null}

Ids are positive integers, strictly increasing within a session.
Responses echo the id, carry "ok", and one result field ("info",
"log_prob", "dist", "log_probs", or nothing for shutdown); failures are
{"id": n, "ok": false, "error": "..."}. Floats cross the wire with repr
semantics so a score survives bit for bit; NaN and infinities are not
legal frames.
"""

import json

PROTOCOL_VERSION = "v1"
ALPHABET = "ACGT"

KINDS = ("handshake", "score_sequence", "next_dist", "score_batch", "shutdown")

_SYMBOLS = frozenset(ALPHABET)


class BadFrame(ValueError):
    """Request line that violates the frame grammar."""


def _check_sequence(payload, allow_empty=False):
    if not isinstance(payload, str):
        raise BadFrame("payload must be a string")
    if not payload and not allow_empty:
        raise BadFrame("payload must be non-empty")
    if set(payload) - _SYMBOLS:
        raise BadFrame("payload contains symbols outside ACGT")


def parse_request(line):
    """Parse and validate one request line into a dict."""
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise BadFrame(f"invalid JSON: {exc}") from exc
    if not isinstance(frame, dict):
        raise BadFrame("frame must be a JSON object")
    req_id = frame.get("id")
    if not isinstance(req_id, int) or isinstance(req_id, bool) or req_id < 1:
        raise BadFrame("id must be a positive integer")
    kind = frame.get("kind")
    if kind not in KINDS:
        raise BadFrame(f"unknown request kind {kind!r}")
    payload = frame.get("payload")
    if kind in ("handshake", "shutdown"):
        if payload is not None:
            raise BadFrame(f"{kind} takes no payload")
    elif kind == "score_sequence":
        _check_sequence(payload)
    elif kind == "next_dist":
        _check_sequence(payload, allow_empty=True)
    else:
        if not isinstance(payload, list):
            raise BadFrame("score_batch payload must be a list")
        for entry in payload:
            _check_sequence(entry)
    return {"id": req_id, "kind": kind, "payload": payload}


def salvage_id(line):
    """Best-effort id from a rejected line, so errors stay matchable.

    Returns 0 when the line is not JSON or carries no usable id.
    """
    try:
        frame = json.loads(line)
    except json.JSONDecodeError:
        return 0
    if isinstance(frame, dict):
        raw = frame.get("id")
        if isinstance(raw, int) and not isinstance(raw, bool):
            return raw
    return 0


def dump_response(req_id, ok=True, **fields):
    """Encode one response frame, newline terminated, canonical layout."""
    frame = {"id": req_id, "ok": ok}
    frame.update(fields)
    return json.dumps(frame, separators=(", ", ": "), allow_nan=False) + "\n"
