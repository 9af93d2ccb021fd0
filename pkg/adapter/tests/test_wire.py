import json
import math

import pytest

from glm_adapter.wire import BadFrame, dump_response, parse_request, salvage_id


def test_parse_request_all_kinds():
    assert parse_request('{"id": 1, "kind": "handshake", "payload": null}') == {
        "id": 1,
        "kind": "handshake",
        "payload": None,
    }
    assert parse_request('{"id": 2, "kind": "score_sequence", "payload": "ACGT"}')[
        "payload"
    ] == "ACGT"
    assert parse_request('{"id": 3, "kind": "next_dist", "payload": ""}')["payload"] == ""
    assert parse_request('{"id": 4, "kind": "score_batch", "payload": ["AC", "GT"]}')[
        "payload"
    ] == ["AC", "GT"]
    assert parse_request('{"id": 5, "kind": "shutdown", "payload": null}')["kind"] == "shutdown"


def test_parse_request_accepts_missing_payload_key_for_handshake():
    # an absent payload reads as null
    assert parse_request('{"id": 1, "kind": "handshake"}')["payload"] is None


@pytest.mark.parametrize(
    "line,message",
    [
        ("not json", "invalid JSON"),
        ("[1, 2]", "must be a JSON object"),
        ('{"kind": "handshake", "payload": null}', "id must be a positive integer"),
        ('{"id": 0, "kind": "handshake", "payload": null}', "id must be a positive integer"),
        ('{"id": -3, "kind": "handshake", "payload": null}', "id must be a positive integer"),
        ('{"id": true, "kind": "handshake", "payload": null}', "id must be a positive integer"),
        ('{"id": "7", "kind": "handshake", "payload": null}', "id must be a positive integer"),
        ('{"id": 1, "kind": "frobnicate", "payload": null}', "unknown request kind"),
        ('{"id": 1, "payload": null}', "unknown request kind"),
        ('{"id": 1, "kind": "handshake", "payload": "x"}', "handshake takes no payload"),
        ('{"id": 1, "kind": "shutdown", "payload": 0}', "shutdown takes no payload"),
        ('{"id": 1, "kind": "score_sequence", "payload": 5}', "payload must be a string"),
        ('{"id": 1, "kind": "score_sequence", "payload": ""}', "payload must be non-empty"),
        ('{"id": 1, "kind": "score_sequence", "payload": "ACGX"}', "outside ACGT"),
        ('{"id": 1, "kind": "score_sequence", "payload": "acgt"}', "outside ACGT"),
        ('{"id": 1, "kind": "next_dist", "payload": null}', "payload must be a string"),
        ('{"id": 1, "kind": "score_batch", "payload": "ACGT"}', "payload must be a list"),
        ('{"id": 1, "kind": "score_batch", "payload": ["ACGT", ""]}', "payload must be non-empty"),
        ('{"id": 1, "kind": "score_batch", "payload": [["A"]]}', "payload must be a string"),
    ],
)
def test_parse_request_rejects(line, message):
    with pytest.raises(BadFrame, match=message):
        parse_request(line)


def test_parse_request_allows_empty_batch():
    assert parse_request('{"id": 1, "kind": "score_batch", "payload": []}')["payload"] == []


def test_salvage_id():
    assert salvage_id('{"id": 9, "kind": "nope"}') == 9
    assert salvage_id('{"id": -2}') == -2
    assert salvage_id('{"id": true}') == 0
    assert salvage_id('{"id": "9"}') == 0
    assert salvage_id("not json") == 0
    assert salvage_id("[1]") == 0


def test_dump_response_canonical_layout():
    assert dump_response(7, log_prob=-1.5) == '{"id": 7, "ok": true, "log_prob": -1.5}\n'
    assert dump_response(7) == '{"id": 7, "ok": true}\n'
    assert (
        dump_response(3, ok=False, error="boom")
        == '{"id": 3, "ok": false, "error": "boom"}\n'
    )


def test_dump_response_floats_round_trip_bit_for_bit():
    value = -5.545177444479562
    line = dump_response(2, log_prob=value)
    assert json.loads(line)["log_prob"] == value
    assert repr(value) in line


def test_dump_response_rejects_nan():
    with pytest.raises(ValueError):
        dump_response(1, log_prob=math.nan)
    with pytest.raises(ValueError):
        dump_response(1, dist=[math.inf, 0.0, 0.0, 0.0])
