"""Transformer checkpoints behind the scoring interface.

This module is imported lazily so the mock and k-gram paths never touch
torch. The backend owns tokenization end to end: wire symbols are
remapped through the configured alphabet, encoded with the checkpoint's
own tokenizer, and the per-token log-likelihoods are summed into one
scalar per sequence.

Causal models score left to right behind a BOS token; if the tokenizer
defines none, the first token has no conditional and is skipped.
Masked-objective models have no left-to-right factorization, so a
sequence gets a pseudo log-likelihood (each position masked and
predicted in turn) and conditionals are served by scoring the four
single-symbol extensions and renormalizing. Both are approximations of
convenience, not claims about the checkpoint's native distribution.
"""

import math

import torch
from transformers import AutoModelForCausalLM, AutoModelForMaskedLM, AutoTokenizer

from .backends import BackendError
from .wire import ALPHABET


class TransformerBackend:
    def __init__(self, config):
        self.device = config.device
        self.max_batch = config.max_batch
        self.alphabet = dict(config.alphabet)
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        except Exception as exc:
            raise BackendError(f"cannot load tokenizer {config.model!r}: {exc}") from exc
        self.causal = True
        try:
            model = AutoModelForCausalLM.from_pretrained(config.model)
        except Exception:
            try:
                model = AutoModelForMaskedLM.from_pretrained(config.model)
            except Exception as exc:
                raise BackendError(f"cannot load model {config.model!r}: {exc}") from exc
            self.causal = False
        self.model = model.to(self.device).eval()
        self.info_name = f"glm-adapter-hf:{config.model}"
        self._symbol_ids = self._single_token_ids()

    def _single_token_ids(self):
        # fast next_dist path needs every symbol to be one vocab entry
        ids = []
        for sym in ALPHABET:
            toks = self.tokenizer.encode(self.alphabet[sym], add_special_tokens=False)
            if len(toks) != 1:
                return None
            ids.append(toks[0])
        return ids

    def _map(self, seq):
        return "".join(self.alphabet[sym] for sym in seq)

    def _ids(self, text):
        ids = self.tokenizer.encode(text, add_special_tokens=True)
        bos = self.tokenizer.bos_token_id
        if bos is not None and (not ids or ids[0] != bos):
            ids = [bos] + ids
        return ids

    # --- scoring ---

    def score(self, seq):
        text = self._map(seq)
        if self.causal:
            return self._causal_score(text)
        return self._masked_score(text)

    def _causal_score(self, text):
        ids = self._ids(text)
        if len(ids) < 2:
            return 0.0
        with torch.no_grad():
            logits = self.model(torch.tensor([ids], device=self.device)).logits[0]
            logprobs = torch.log_softmax(logits.float(), dim=-1)
        total = 0.0
        for pos in range(1, len(ids)):
            total += float(logprobs[pos - 1, ids[pos]])
        return total

    def _masked_score(self, text):
        tok = self.tokenizer
        if tok.mask_token_id is None:
            raise RuntimeError("masked model defines no mask token")
        ids = tok.encode(text, add_special_tokens=True)
        special = set(tok.all_special_ids)
        positions = [i for i, t in enumerate(ids) if t not in special]
        total = 0.0
        for start in range(0, len(positions), self.max_batch):
            chunk = positions[start:start + self.max_batch]
            batch = []
            for pos in chunk:
                row = list(ids)
                row[pos] = tok.mask_token_id
                batch.append(row)
            with torch.no_grad():
                logits = self.model(torch.tensor(batch, device=self.device)).logits
                logprobs = torch.log_softmax(logits.float(), dim=-1)
            for row_idx, pos in enumerate(chunk):
                total += float(logprobs[row_idx, pos, ids[pos]])
        return total

    def score_many(self, seqs):
        if not self.causal:
            return [self.score(s) for s in seqs]
        rows = [self._ids(self._map(s)) for s in seqs]
        longest = max(len(r) for r in rows)
        pad = self.tokenizer.pad_token_id
        if pad is None:
            pad = 0  # behind the attention mask, value is irrelevant
        batch = [r + [pad] * (longest - len(r)) for r in rows]
        mask = [[1] * len(r) + [0] * (longest - len(r)) for r in rows]
        with torch.no_grad():
            logits = self.model(
                torch.tensor(batch, device=self.device),
                attention_mask=torch.tensor(mask, device=self.device),
            ).logits
            logprobs = torch.log_softmax(logits.float(), dim=-1)
        out = []
        for row_idx, ids in enumerate(rows):
            total = 0.0
            for pos in range(1, len(ids)):
                total += float(logprobs[row_idx, pos - 1, ids[pos]])
            out.append(total)
        return out

    # --- conditionals ---

    def next_dist(self, prefix):
        if self.causal and self._symbol_ids is not None:
            return self._causal_next(prefix)
        return self._extension_next(prefix)

    def _causal_next(self, prefix):
        ids = self._ids(self._map(prefix))
        if not ids:
            return self._extension_next(prefix)
        with torch.no_grad():
            logits = self.model(torch.tensor([ids], device=self.device)).logits[0, -1]
        picked = logits.float()[torch.tensor(self._symbol_ids)]
        probs = [float(p) for p in torch.softmax(picked, dim=-1)]
        total = sum(probs)  # float32 softmax sums to 1 only approximately
        return tuple(p / total for p in probs)

    def _extension_next(self, prefix):
        base = self.score(prefix) if prefix else 0.0
        weights = [math.exp(self.score(prefix + sym) - base) for sym in ALPHABET]
        total = sum(weights)
        return tuple(w / total for w in weights)
