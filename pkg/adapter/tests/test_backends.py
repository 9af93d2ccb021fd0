import json
import math

import pytest

from glm_adapter.backends import BackendError, KgramEvaluator, MockUniform, load_backend
from glm_adapter.config import AdapterConfig

# order-2 tables counted from the single training string "AAAA":
# 4 positions at context length 0, 3 at length 1
AAAA_MODEL = {
    "format": "kgram-model",
    "version": 1,
    "order": 2,
    "lambda": 1.0,
    "tables": [{"": [4, 0, 0, 0]}, {"A": [3, 0, 0, 0]}],
}


@pytest.fixture()
def aaaa_path(tmp_path):
    path = tmp_path / "aaaa.json"
    path.write_text(json.dumps(AAAA_MODEL))
    return path


def test_mock_uniform_values():
    mock = MockUniform()
    assert mock.info_name == "mock-uniform"
    assert mock.max_symbol_prob == 0.25
    assert mock.score("ACGT") == 4 * math.log(0.25)
    assert mock.score("A") == math.log(0.25)
    assert mock.next_dist("") == (0.25, 0.25, 0.25, 0.25)
    assert mock.next_dist("ACGT") == (0.25, 0.25, 0.25, 0.25)


def test_kgram_distributions_match_hand_blend(aaaa_path):
    ev = KgramEvaluator.load(aaaa_path)
    # level 0: (4 + 1*0.25)/(4 + 1) = 0.85, others (0 + 1*0.25)/5 = 0.05
    assert ev.next_dist("") == (0.85, 0.05, 0.05, 0.05)
    # level 1 on context "A": (3 + 1*0.85)/(3 + 1) = 0.9625
    assert ev.next_dist("A") == (0.9625, 0.0125, 0.0125, 0.0125)
    # longer prefixes use only the last order-1 symbols
    assert ev.next_dist("CGA") == ev.next_dist("A")
    # unseen level-1 context falls through to level 0
    assert ev.next_dist("C") == (0.85, 0.05, 0.05, 0.05)


def test_kgram_score_is_chain_rule(aaaa_path):
    ev = KgramEvaluator.load(aaaa_path)
    assert ev.score("AA") == math.log(0.85) + math.log(0.9625)
    assert ev.score("CA") == math.log(0.05) + math.log(0.85)
    assert ev.score("") == 0.0


def test_kgram_bound_covers_every_context(aaaa_path):
    ev = KgramEvaluator.load(aaaa_path)
    # level 0 bound (4+0.25)/5 = 0.85, level 1 (3+0.85)/4 = 0.9625
    assert ev.max_symbol_prob == 0.9625
    for ctx in ("", "A", "C", "GT"):
        assert max(ev.next_dist(ctx)) <= ev.max_symbol_prob


def test_kgram_load_rejects_bad_documents(tmp_path):
    bogus = tmp_path / "bogus.json"
    bogus.write_text('{"format": "something-else"}')
    with pytest.raises(BackendError, match="not a kgram-model document"):
        KgramEvaluator.load(bogus)
    bogus.write_text(json.dumps(dict(AAAA_MODEL, version=99)))
    with pytest.raises(BackendError, match="unsupported model version"):
        KgramEvaluator.load(bogus)
    bogus.write_text(json.dumps({**AAAA_MODEL, "tables": [{}]}))
    with pytest.raises(BackendError, match="malformed model"):
        KgramEvaluator.load(bogus)
    bogus.write_text("{ not json")
    with pytest.raises(BackendError):
        KgramEvaluator.load(bogus)
    with pytest.raises(BackendError):
        KgramEvaluator.load(tmp_path / "missing.json")


def test_kgram_constructor_validation():
    with pytest.raises(ValueError, match="order must be >= 1"):
        KgramEvaluator(0, 1.0, [])
    with pytest.raises(ValueError, match="lam must be > 0"):
        KgramEvaluator(1, 0.0, [{}])
    with pytest.raises(ValueError, match="context tables"):
        KgramEvaluator(2, 1.0, [{}])


def test_load_backend_resolution(aaaa_path):
    assert isinstance(load_backend(AdapterConfig(model="mock")), MockUniform)
    backend = load_backend(AdapterConfig(model=str(aaaa_path)))
    assert isinstance(backend, KgramEvaluator)
    assert backend.order == 2


def test_load_backend_rejects_non_model_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"datasets": []}')
    with pytest.raises(BackendError):
        load_backend(AdapterConfig(model=str(path)))


def test_config_validation():
    with pytest.raises(ValueError, match="model must be"):
        AdapterConfig(model="")
    with pytest.raises(ValueError, match="max_batch must be >= 1"):
        AdapterConfig(model="mock", max_batch=0)
    with pytest.raises(ValueError, match="max_batch must be an integer"):
        AdapterConfig(model="mock", max_batch=True)
    with pytest.raises(ValueError, match="device must be"):
        AdapterConfig(model="mock", device="")
    with pytest.raises(ValueError, match="exactly the symbols"):
        AdapterConfig(model="mock", alphabet={"A": "a"})
    with pytest.raises(ValueError, match="exactly the symbols"):
        AdapterConfig(model="mock", alphabet={"A": "a", "C": "c", "G": "g", "T": "t", "N": "n"})
    with pytest.raises(ValueError, match="non-empty string"):
        AdapterConfig(model="mock", alphabet={"A": "", "C": "c", "G": "g", "T": "t"})


def test_parse_alphabet():
    from glm_adapter.config import parse_alphabet

    assert parse_alphabet("A=a,C=c,G=g,T=t") == {"A": "a", "C": "c", "G": "g", "T": "t"}
    assert parse_alphabet("A = a , C=c,G=g,T=t")["A"] == "a"
    with pytest.raises(ValueError, match="not KEY=VALUE"):
        parse_alphabet("A:a")
