"""Adapter wire protocol: score external sequence models over a byte stream.

One JSON object per newline-terminated UTF-8 line, over either a child
process's stdin/stdout or a TCP connection. Requests carry raw ACGT text;
tokenization is entirely the adapter's business.

Request frame (canonical key order id, kind, payload; compact separators):

    {"id": 1, "kind": "handshake", "payload": null}
    {"id": 2, "kind": "score_sequence", "payload": "ACGT..."}
    {"id": 3, "kind": "next_dist", "payload": "ACG"}        (may be "")
    {"id": 4, "kind": "score_batch", "payload": ["ACGT", ...]}
    {"id": 5, "kind": "shutdown", "payload": null}

Response frames (canonical key order id, ok, then the result key):

    {"id": 1, "ok": true, "info": {"name": ..., "protocol": "v1",
        "alphabet": "ACGT", "score_batch": true,
        "max_symbol_prob": 0.25}}                  (max_symbol_prob optional)
    {"id": 2, "ok": true, "log_prob": -5.545177444479562}
    {"id": 3, "ok": true, "dist": [0.25, 0.25, 0.25, 0.25]}
    {"id": 4, "ok": true, "log_probs": [-5.545177444479562, ...]}
    {"id": 5, "ok": true}
    {"id": N, "ok": false, "error": "message"}

Within a session ids are unique and strictly increasing, one request is in
flight at a time, and responses come back in request order. Floats are
emitted with Python repr semantics (shortest round-trip decimal), so a
score crosses the wire bit for bit. NaN and infinities are not legal on
the wire; adapters signal unscorable inputs with an error frame.
"""

from __future__ import annotations

import json
import select
import shlex
import socket
import subprocess
import sys
import time

from .corpus import ALPHABET
from .models import KgramModel, UniformModel

PROTOCOL_VERSION = "v1"
DEFAULT_TIMEOUT = 30.0

REQUEST_KINDS = ("handshake", "score_sequence", "next_dist", "score_batch", "shutdown")

_VALID_SYMBOLS = frozenset(ALPHABET)


class AdapterError(Exception):
    """Base class for adapter session failures."""


class ProtocolError(AdapterError):
    """Malformed or rule-breaking frame; carries the offending line."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"{message}; line: {line!r}")
        self.line = line


class AdapterTimeoutError(AdapterError):
    """No response within the session timeout."""


class AdapterProcessError(AdapterError):
    """The adapter endpoint could not be started or reached, or died."""


class AdapterRemoteError(AdapterError):
    """The adapter answered with an error frame."""


# --- frame codec ---


def _dumps(obj):
    return json.dumps(obj, separators=(", ", ": "), allow_nan=False)


def encode_request(req_id, kind, payload=None):
    """Encode one request frame, newline terminated."""
    if kind not in REQUEST_KINDS:
        raise ValueError(f"unknown request kind {kind!r}")
    return _dumps({"id": req_id, "kind": kind, "payload": payload}) + "\n"


def encode_response(req_id, ok=True, **fields):
    """Encode one response frame, newline terminated."""
    frame = {"id": req_id, "ok": ok}
    frame.update(fields)
    return _dumps(frame) + "\n"


def _check_sequence_payload(payload, line, allow_empty):
    if not isinstance(payload, str):
        raise ProtocolError("payload must be a string", line)
    if not payload and not allow_empty:
        raise ProtocolError("payload must be non-empty", line)
    if set(payload) - _VALID_SYMBOLS:
        raise ProtocolError("payload contains symbols outside ACGT", line)


def decode_request(line):
    """Parse and validate one request line into a dict."""
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc}", line) from exc
    if not isinstance(frame, dict):
        raise ProtocolError("frame must be a JSON object", line)
    req_id = frame.get("id")
    if not isinstance(req_id, int) or isinstance(req_id, bool) or req_id < 1:
        raise ProtocolError("id must be a positive integer", line)
    kind = frame.get("kind")
    if kind not in REQUEST_KINDS:
        raise ProtocolError(f"unknown kind {kind!r}", line)
    payload = frame.get("payload")
    if kind in ("handshake", "shutdown"):
        if payload is not None:
            raise ProtocolError(f"{kind} takes no payload", line)
    elif kind == "score_sequence":
        _check_sequence_payload(payload, line, allow_empty=False)
    elif kind == "next_dist":
        _check_sequence_payload(payload, line, allow_empty=True)
    elif kind == "score_batch":
        if not isinstance(payload, list):
            raise ProtocolError("score_batch payload must be a list", line)
        for item in payload:
            _check_sequence_payload(item, line, allow_empty=False)
    return {"id": req_id, "kind": kind, "payload": payload}


def _require_float(value, name, line):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{name} must be a number", line)
    return float(value)


def decode_response(line, kind=None):
    """Parse and validate one response line; kind selects the result check."""
    try:
        frame = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc}", line) from exc
    if not isinstance(frame, dict):
        raise ProtocolError("frame must be a JSON object", line)
    req_id = frame.get("id")
    if not isinstance(req_id, int) or isinstance(req_id, bool):
        raise ProtocolError("id must be an integer", line)
    ok = frame.get("ok")
    if not isinstance(ok, bool):
        raise ProtocolError("ok must be a boolean", line)
    if not ok:
        if not isinstance(frame.get("error"), str):
            raise ProtocolError("error frame must carry an error string", line)
        return frame
    if kind == "handshake":
        info = frame.get("info")
        if not isinstance(info, dict):
            raise ProtocolError("handshake response must carry info", line)
        if info.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(
                f"unsupported protocol {info.get('protocol')!r}", line
            )
        if info.get("alphabet") != ALPHABET:
            raise ProtocolError(f"alphabet must be {ALPHABET!r}", line)
    elif kind == "score_sequence":
        frame["log_prob"] = _require_float(frame.get("log_prob"), "log_prob", line)
    elif kind == "next_dist":
        dist = frame.get("dist")
        if not isinstance(dist, list) or len(dist) != 4:
            raise ProtocolError("dist must be a list of 4 numbers", line)
        dist = [_require_float(v, "dist entry", line) for v in dist]
        if any(v < 0.0 for v in dist):
            raise ProtocolError("dist entries must be >= 0", line)
        if abs(sum(dist) - 1.0) > 1e-6:
            raise ProtocolError("dist must sum to 1 within 1e-6", line)
        frame["dist"] = dist
    elif kind == "score_batch":
        log_probs = frame.get("log_probs")
        if not isinstance(log_probs, list):
            raise ProtocolError("log_probs must be a list", line)
        frame["log_probs"] = [
            _require_float(v, "log_probs entry", line) for v in log_probs
        ]
    return frame


# --- byte channels ---


def _stderr_target():
    # pass the adapter's stderr through when ours is a real stream,
    # otherwise (captured or detached) silence it
    try:
        return sys.stderr.fileno() if sys.stderr else subprocess.DEVNULL
    except (OSError, ValueError, AttributeError):
        return subprocess.DEVNULL


class _StdioChannel:
    """Line channel over a child process's stdin/stdout."""

    def __init__(self, argv):
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=_stderr_target(),
                bufsize=0,
            )
        except OSError as exc:
            raise AdapterProcessError(f"could not start adapter {argv!r}: {exc}") from exc
        self._buf = bytearray()

    def send_line(self, line):
        try:
            self.proc.stdin.write(line.encode("utf-8"))
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterProcessError(f"adapter process closed stdin: {exc}") from exc

    def recv_line(self, timeout):
        deadline = time.monotonic() + timeout
        fd = self.proc.stdout.fileno()
        while True:
            newline = self._buf.find(b"\n")
            if newline >= 0:
                line = self._buf[:newline].decode("utf-8")
                del self._buf[:newline + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AdapterTimeoutError(f"no response within {timeout} s")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                raise AdapterTimeoutError(f"no response within {timeout} s")
            chunk = self.proc.stdout.read(65536)
            if not chunk:
                raise AdapterProcessError("adapter process closed its stdout")
            self._buf.extend(chunk)

    def close(self):
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class _TcpChannel:
    """Line channel over a TCP connection."""

    def __init__(self, host, port, timeout):
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise AdapterProcessError(f"could not connect to {host}:{port}: {exc}") from exc
        self._buf = bytearray()

    def send_line(self, line):
        try:
            self.sock.sendall(line.encode("utf-8"))
        except OSError as exc:
            raise AdapterProcessError(f"connection lost: {exc}") from exc

    def recv_line(self, timeout):
        deadline = time.monotonic() + timeout
        while True:
            newline = self._buf.find(b"\n")
            if newline >= 0:
                line = self._buf[:newline].decode("utf-8")
                del self._buf[:newline + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise AdapterTimeoutError(f"no response within {timeout} s")
            self.sock.settimeout(remaining)
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout as exc:
                raise AdapterTimeoutError(f"no response within {timeout} s") from exc
            except OSError as exc:
                raise AdapterProcessError(f"connection lost: {exc}") from exc
            if not chunk:
                raise AdapterProcessError("adapter closed the connection")
            self._buf.extend(chunk)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


def _open_channel(endpoint, timeout):
    if isinstance(endpoint, (list, tuple)):
        return _StdioChannel(list(endpoint))
    if isinstance(endpoint, str):
        if endpoint.startswith("tcp:"):
            rest = endpoint[4:]
            host, _, port = rest.rpartition(":")
            if not host or not port.isdigit():
                raise ValueError(f"bad TCP endpoint {endpoint!r}, want tcp:host:port")
            return _TcpChannel(host, int(port), timeout)
        return _StdioChannel(shlex.split(endpoint))
    raise TypeError("endpoint must be an argv list or an endpoint string")


# --- client ---


class RemoteScoredModel:
    """ScoredModel backed by an adapter process or socket.

    Endpoint forms: an argv list (spawn and talk over stdio), a command
    string (shlex-split, then stdio), or "tcp:host:port". The handshake
    runs on construction. Usable as a context manager; close() sends
    shutdown and tears the channel down.
    """

    def __init__(self, endpoint, timeout=DEFAULT_TIMEOUT):
        self.timeout = timeout
        self._channel = _open_channel(endpoint, timeout)
        self._next_id = 1
        self._closed = False
        try:
            info = self._call("handshake")["info"]
        except AdapterError:
            self._teardown()
            raise
        self.info = info
        self.name = info.get("name", "adapter")
        self.supports_batch = bool(info.get("score_batch", False))
        self.max_symbol_prob = float(info.get("max_symbol_prob", 1.0))

    def _call(self, kind, payload=None):
        if self._closed:
            raise AdapterError("session is closed")
        req_id = self._next_id
        self._next_id += 1
        self._channel.send_line(encode_request(req_id, kind, payload))
        line = self._channel.recv_line(self.timeout)
        frame = decode_response(line, kind=kind)
        if frame["id"] != req_id:
            raise ProtocolError(
                f"response id {frame['id']} does not match request id {req_id}", line
            )
        if not frame["ok"]:
            raise AdapterRemoteError(frame["error"])
        return frame

    def sequence_log_prob(self, seq):
        return self._call("score_sequence", seq)["log_prob"]

    def next_dist(self, prefix):
        return tuple(self._call("next_dist", prefix)["dist"])

    def score_batch(self, seqs):
        """Score many sequences; falls back to one-by-one when unsupported."""
        seqs = list(seqs)
        if not seqs:
            return []
        if not self.supports_batch:
            return [self.sequence_log_prob(s) for s in seqs]
        log_probs = self._call("score_batch", seqs)["log_probs"]
        if len(log_probs) != len(seqs):
            raise ProtocolError(
                f"score_batch returned {len(log_probs)} scores for {len(seqs)} inputs"
            )
        return log_probs

    def close(self):
        if self._closed:
            return
        try:
            self._call("shutdown")
        except AdapterError:
            pass
        self._teardown()

    def _teardown(self):
        self._closed = True
        self._channel.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False


# --- reference server ---


def serve_model(model, rfile, wfile, name="loopback"):
    """Serve a ScoredModel over text streams until shutdown or EOF.

    Per-request failures produce error frames and the session continues;
    only shutdown or a closed input ends the loop. Used for loopback
    differential testing of the protocol.
    """
    info = {
        "name": name,
        "protocol": PROTOCOL_VERSION,
        "alphabet": ALPHABET,
        "score_batch": True,
    }
    bound = getattr(model, "max_symbol_prob", None)
    if bound is not None:
        info["max_symbol_prob"] = float(bound)
    last_id = 0
    for raw in rfile:
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        try:
            request = decode_request(line)
        except ProtocolError as exc:
            # Salvage the id when the line was well-formed JSON so the
            # client can match the error to its request.
            err_id = 0
            try:
                frame = json.loads(line)
                if isinstance(frame, dict):
                    raw_id = frame.get("id")
                    if isinstance(raw_id, int) and not isinstance(raw_id, bool):
                        err_id = raw_id
            except json.JSONDecodeError:
                pass
            wfile.write(encode_response(err_id, ok=False, error=str(exc)))
            wfile.flush()
            continue
        req_id = request["id"]
        if req_id <= last_id:
            wfile.write(
                encode_response(
                    req_id, ok=False, error=f"id {req_id} not greater than {last_id}"
                )
            )
            wfile.flush()
            continue
        last_id = req_id
        kind = request["kind"]
        payload = request["payload"]
        try:
            if kind == "handshake":
                response = encode_response(req_id, info=info)
            elif kind == "score_sequence":
                response = encode_response(
                    req_id, log_prob=model.sequence_log_prob(payload)
                )
            elif kind == "next_dist":
                response = encode_response(
                    req_id, dist=[float(p) for p in model.next_dist(payload)]
                )
            elif kind == "score_batch":
                response = encode_response(
                    req_id,
                    log_probs=[model.sequence_log_prob(s) for s in payload],
                )
            elif kind == "shutdown":
                wfile.write(encode_response(req_id))
                wfile.flush()
                return
        except Exception as exc:  # per-request fault isolation
            response = encode_response(req_id, ok=False, error=str(exc))
        wfile.write(response)
        wfile.flush()


def serve_main(argv=None):
    """Loopback server entry behind python -m memaudit.serve."""
    import argparse

    parser = argparse.ArgumentParser(
        prog="python -m memaudit.serve",
        description="Serve a built-in model over the adapter protocol.",
    )
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--model-file", help="path to a saved k-gram model")
    group.add_argument(
        "--uniform", action="store_true", help="serve the uniform model"
    )
    parser.add_argument(
        "--tcp",
        type=int,
        metavar="PORT",
        help="listen on 127.0.0.1:PORT for one connection (0 picks a port)",
    )
    args = parser.parse_args(argv)
    model = UniformModel() if args.uniform else KgramModel.load(args.model_file)
    if args.tcp is None:
        serve_model(model, sys.stdin, sys.stdout, name="memaudit-loopback")
        return 0
    server = socket.create_server(("127.0.0.1", args.tcp))
    port = server.getsockname()[1]
    print(f"listening {port}", file=sys.stderr, flush=True)
    conn, _ = server.accept()
    with conn:
        rfile = conn.makefile("r", encoding="utf-8", newline="\n")
        wfile = conn.makefile("w", encoding="utf-8", newline="\n")
        serve_model(model, rfile, wfile, name="memaudit-loopback")
    server.close()
    return 0
