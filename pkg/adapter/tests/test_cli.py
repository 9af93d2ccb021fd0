import json
import math
import socket
import subprocess

from conftest import PYTHON

ADAPTER = [PYTHON, "-m", "glm_adapter"]

SESSION = (
    '{"id": 1, "kind": "handshake", "payload": null}\n'
    '{"id": 2, "kind": "score_sequence", "payload": "ACGT"}\n'
    '{"id": 3, "kind": "shutdown", "payload": null}\n'
)


def test_version():
    proc = subprocess.run(ADAPTER + ["--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("glm-adapter ")


def test_serve_mock_over_stdio():
    proc = subprocess.run(
        ADAPTER + ["serve", "--model", "mock"],
        input=SESSION,
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 0
    frames = [json.loads(line) for line in proc.stdout.splitlines()]
    assert [f["id"] for f in frames] == [1, 2, 3]
    assert frames[0]["info"]["name"] == "mock-uniform"


def test_serve_ends_cleanly_on_eof():
    proc = subprocess.run(
        ADAPTER + ["serve", "--model", "mock"],
        input='{"id": 1, "kind": "handshake", "payload": null}\n',
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 1


def test_unloadable_model_exits_nonzero(tmp_path):
    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"format": "not-a-model"}')
    proc = subprocess.run(
        ADAPTER + ["serve", "--model", str(bogus)],
        input="",
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 1
    assert "error:" in proc.stderr


def test_bad_transport_exits_two():
    proc = subprocess.run(
        ADAPTER + ["serve", "--model", "mock", "--transport", "carrier-pigeon"],
        input="",
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 2
    assert "transport" in proc.stderr


def test_bad_alphabet_exits_two():
    proc = subprocess.run(
        ADAPTER + ["serve", "--model", "mock", "--alphabet", "A=a"],
        input="",
        capture_output=True,
        text=True,
        timeout=30,
    )
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_tcp_transport_serves_one_connection():
    proc = subprocess.Popen(
        ADAPTER + ["serve", "--model", "mock", "--transport", "tcp:0"],
        stderr=subprocess.PIPE,
        text=True,
    )
    try:
        announce = proc.stderr.readline().strip()
        assert announce.startswith("listening ")
        port = int(announce.split()[1])
        with socket.create_connection(("127.0.0.1", port), timeout=10) as conn:
            conn.sendall(SESSION.encode())
            received = b""
            while received.count(b"\n") < 3:
                chunk = conn.recv(4096)
                if not chunk:
                    break
                received += chunk
        frames = [json.loads(line) for line in received.decode().splitlines()]
        assert [f["id"] for f in frames] == [1, 2, 3]
        assert frames[1]["log_prob"] == 4 * math.log(0.25)
        assert proc.wait(timeout=10) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
        proc.stderr.close()
