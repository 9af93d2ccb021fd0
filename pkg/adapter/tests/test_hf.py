"""Transformer backend against a tiny checkpoint built on the spot.

No hub access: the model is a randomly initialized one-layer causal LM
with a character-level ACGT tokenizer, saved to a temp directory and
loaded back through the normal auto classes. Values are checked against
log-likelihoods computed directly with the same weights.
"""

import io
import json
import math

import pytest

torch = pytest.importorskip("torch")
transformers = pytest.importorskip("transformers")

from glm_adapter.config import AdapterConfig
from glm_adapter.server import serve_session


@pytest.fixture(scope="module")
def tiny_checkpoint(tmp_path_factory):
    from tokenizers import Regex, Tokenizer, models, pre_tokenizers, processors
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    vocab = {"[BOS]": 0, "[UNK]": 1, "A": 2, "C": 3, "G": 4, "T": 5}
    tk = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tk.pre_tokenizer = pre_tokenizers.Split(Regex("."), behavior="isolated")
    tk.post_processor = processors.TemplateProcessing(
        single="[BOS] $A", special_tokens=[("[BOS]", 0)]
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=tk, bos_token="[BOS]", unk_token="[UNK]"
    )
    torch.manual_seed(0)
    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=64,
        n_embd=16,
        n_layer=1,
        n_head=2,
        bos_token_id=0,
        eos_token_id=0,
    )
    model = GPT2LMHeadModel(config)
    path = tmp_path_factory.mktemp("tiny-lm")
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="module")
def backend(tiny_checkpoint):
    from glm_adapter.hf import TransformerBackend

    return TransformerBackend(AdapterConfig(model=tiny_checkpoint))


def _manual_score(backend, seq):
    ids = backend.tokenizer.encode(seq, add_special_tokens=True)
    with torch.no_grad():
        logits = backend.model(torch.tensor([ids])).logits[0]
        logprobs = torch.log_softmax(logits.float(), dim=-1)
    return sum(float(logprobs[t - 1, ids[t]]) for t in range(1, len(ids)))


def test_loads_as_causal(backend, tiny_checkpoint):
    assert backend.causal is True
    assert backend.info_name == f"glm-adapter-hf:{tiny_checkpoint}"
    assert backend._symbol_ids == [2, 3, 4, 5]


def test_score_sums_per_token_log_likelihoods(backend):
    for seq in ("ACGT", "A", "TTTTTTGGGG"):
        assert backend.score(seq) == pytest.approx(_manual_score(backend, seq), abs=1e-5)


def test_next_dist_is_renormalized_last_position(backend):
    dist = backend.next_dist("ACG")
    assert len(dist) == 4
    assert sum(dist) == pytest.approx(1.0, abs=1e-9)
    assert all(p > 0 for p in dist)
    # matches the conditional implied by full-sequence scores
    base = backend.score("ACG")
    implied = [math.exp(backend.score("ACG" + s) - base) for s in "ACGT"]
    implied = [w / sum(implied) for w in implied]
    for got, want in zip(dist, implied):
        assert got == pytest.approx(want, abs=1e-4)


def test_next_dist_on_empty_prefix(backend):
    dist = backend.next_dist("")
    assert sum(dist) == pytest.approx(1.0, abs=1e-9)


def test_extension_fallback_agrees_with_fast_path(backend):
    fast = backend.next_dist("GAT")
    slow = backend._extension_next("GAT")
    for got, want in zip(fast, slow):
        assert got == pytest.approx(want, abs=1e-4)


def test_batched_scores_match_single(backend):
    seqs = ["ACGT", "A", "GG", "TTTAC"]
    batched = backend.score_many(seqs)
    for got, seq in zip(batched, seqs):
        assert got == pytest.approx(backend.score(seq), abs=1e-4)


def test_serves_over_the_protocol(backend):
    out = io.StringIO()
    serve_session(
        backend,
        io.StringIO(
            '{"id": 1, "kind": "handshake", "payload": null}\n'
            '{"id": 2, "kind": "score_sequence", "payload": "ACGT"}\n'
            '{"id": 3, "kind": "next_dist", "payload": "AC"}\n'
            '{"id": 4, "kind": "score_batch", "payload": ["A", "CG"]}\n'
            '{"id": 5, "kind": "shutdown", "payload": null}\n'
        ),
        out,
        max_batch=2,
    )
    frames = [json.loads(line) for line in out.getvalue().splitlines()]
    assert all(f["ok"] for f in frames)
    assert "max_symbol_prob" not in frames[0]["info"]
    assert frames[1]["log_prob"] == pytest.approx(backend.score("ACGT"), abs=1e-6)
    assert sum(frames[2]["dist"]) == pytest.approx(1.0, abs=1e-9)
    assert len(frames[3]["log_probs"]) == 2


def test_alphabet_remap_changes_model_text(tiny_checkpoint):
    from glm_adapter.hf import TransformerBackend

    # map every wire symbol to "A": all sequences of one length score alike
    cfg = AdapterConfig(
        model=tiny_checkpoint,
        alphabet={"A": "A", "C": "A", "G": "A", "T": "A"},
    )
    collapsed = TransformerBackend(cfg)
    assert collapsed.score("CGT") == pytest.approx(collapsed.score("AAA"), abs=1e-6)
