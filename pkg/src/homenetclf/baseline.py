"""Bag-of-words baseline: vocabulary-presence vector into a linear softmax.

The multi-hot input marks which vocabulary tokens occur at least once in the
full (untruncated) token list of a document; counts and order are discarded.
Training uses the same protocol as the transformer.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import torch
import torch.nn as nn

from .config import ModelConfig
from .errors import NumericalDivergenceError
from .train import BatchFn, TrainingHistory, fit
from .vocab import Vocabulary

INIT_STD = 0.02


def multi_hot(tokens: list[str], vocab: Vocabulary) -> np.ndarray:
    """Binary presence vector over the vocabulary; unknown tokens set UNK."""
    x = np.zeros(vocab.size, dtype=np.float32)
    for tok in tokens:
        x[vocab.lookup(tok)] = 1.0
    x[vocab.pad_id] = 0.0
    return x


def present_ids(tokens: list[str], vocab: Vocabulary) -> np.ndarray:
    """Sorted unique token ids for one document (compact multi-hot form)."""
    ids = {vocab.lookup(tok) for tok in tokens}
    ids.discard(vocab.pad_id)
    return np.fromiter(sorted(ids), dtype=np.int64)


class BowClassifier(nn.Module):
    def __init__(self, config: ModelConfig, vocab_size: int):
        super().__init__()
        self.config = config
        self.vocab_size = vocab_size
        self.linear = nn.Linear(vocab_size, config.num_classes)
        gen = torch.Generator().manual_seed(config.seed)
        with torch.no_grad():
            self.linear.weight.normal_(0.0, INIT_STD, generator=gen)
            self.linear.bias.zero_()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, vocab_size) multi-hot -> (B, num_classes) probabilities."""
        probs = torch.softmax(self.linear(x), dim=-1)
        if not torch.isfinite(probs).all():
            raise NumericalDivergenceError("non-finite probabilities in BoW forward")
        return probs


def multi_hot_batcher(docs: list[np.ndarray], vocab_size: int) -> BatchFn:
    """Batcher over compact id lists; materializes dense rows per batch."""
    def make_batch(idx: torch.Tensor) -> torch.Tensor:
        batch = torch.zeros(len(idx), vocab_size)
        for row, i in enumerate(idx.tolist()):
            ids = docs[i]
            if len(ids):
                batch[row, torch.from_numpy(ids)] = 1.0
        return batch

    return make_batch


def bow_train(
    train_tokens: list[list[str]],
    train_labels: torch.Tensor,
    valid_tokens: list[list[str]],
    valid_labels: torch.Tensor,
    vocab: Vocabulary,
    config: ModelConfig,
    log: Callable[[str], None] | None = None,
) -> tuple[BowClassifier, TrainingHistory]:
    model = BowClassifier(config, vocab.size)
    train_docs = [present_ids(toks, vocab) for toks in train_tokens]
    valid_docs = [present_ids(toks, vocab) for toks in valid_tokens]
    history = fit(
        model,
        config,
        multi_hot_batcher(train_docs, vocab.size),
        train_labels,
        multi_hot_batcher(valid_docs, vocab.size),
        valid_labels,
        log=log,
    )
    return model, history


@torch.no_grad()
def bow_predict(
    tokens: list[str], vocab: Vocabulary, model: BowClassifier
) -> tuple[torch.Tensor, int]:
    model.eval()
    x = torch.from_numpy(multi_hot(tokens, vocab)).unsqueeze(0)
    probs = model(x)[0]
    return probs, int(probs.argmax())
