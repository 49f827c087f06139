"""Versioned checkpoint container for trained classifiers.

A checkpoint stores the model kind, its config, the pre-tokenizer it was
trained with, a hash of the vocabulary it is bound to, and all parameter
tensors.  Loading rebuilds the module and validates every tensor shape
against the config before copying weights in.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .baseline import BowClassifier
from .config import ModelConfig
from .errors import DataFormatError
from .model import TransformerClassifier
from .pretokenize import PreTokenizerKind, PreTokenizerSpec
from .vocab import Vocabulary

FORMAT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    model: TransformerClassifier | BowClassifier,
    spec: PreTokenizerSpec,
    vocab: Vocabulary,
) -> None:
    kind = "transformer" if isinstance(model, TransformerClassifier) else "bow"
    payload = {
        "format_version": FORMAT_VERSION,
        "model_kind": kind,
        "config": model.config.to_dict(),
        "pretokenizer": {"kind": spec.kind.value, "k": spec.k},
        "vocab_hash": vocab.content_hash(),
        "vocab_size": vocab.size,
        "state": model.state_dict(),
    }
    torch.save(payload, path)


def load_checkpoint(
    path: str | Path, vocab: Vocabulary
) -> tuple[TransformerClassifier | BowClassifier, PreTokenizerSpec]:
    try:
        payload = torch.load(path, weights_only=True)
    except Exception as exc:
        raise DataFormatError(f"{path}: cannot read checkpoint: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported checkpoint format")

    if payload["vocab_hash"] != vocab.content_hash():
        raise DataFormatError(
            f"{path}: checkpoint was trained with a different vocabulary "
            f"(hash mismatch)"
        )
    if payload["vocab_size"] != vocab.size:
        raise DataFormatError(
            f"{path}: vocabulary size {vocab.size} does not match checkpoint "
            f"({payload['vocab_size']})"
        )

    config = ModelConfig.from_dict(payload["config"])
    kind = payload["model_kind"]
    if kind == "transformer":
        model: TransformerClassifier | BowClassifier = TransformerClassifier(
            config, vocab.size
        )
    elif kind == "bow":
        model = BowClassifier(config, vocab.size)
    else:
        raise DataFormatError(f"{path}: unknown model kind {kind!r}")

    state = payload["state"]
    expected = model.state_dict()
    if set(state) != set(expected):
        missing = set(expected) - set(state)
        extra = set(state) - set(expected)
        raise DataFormatError(
            f"{path}: parameter names do not match config (missing={sorted(missing)}, "
            f"unexpected={sorted(extra)})"
        )
    for name, tensor in state.items():
        if tuple(tensor.shape) != tuple(expected[name].shape):
            raise DataFormatError(
                f"{path}: shape mismatch for {name}: checkpoint "
                f"{tuple(tensor.shape)} vs config {tuple(expected[name].shape)}"
            )
    model.load_state_dict(state)
    model.eval()

    ptk = payload["pretokenizer"]
    spec = PreTokenizerSpec(kind=PreTokenizerKind(ptk["kind"]), k=int(ptk["k"]))
    return model, spec
