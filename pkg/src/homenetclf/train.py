"""Mini-batch training with early stopping, shared by both classifiers.

The transformer and the bag-of-words baseline train under the identical
protocol: AdamW over shuffled mini-batches, per-epoch validation, keep the
parameters with the best validation accuracy, stop after ``patience`` epochs
without improvement.  Everything is a deterministic function of the config
seed.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import torch

from .config import ModelConfig
from .datagen import CLASS_INDEX, LogSample
from .errors import ConfigurationError, NumericalDivergenceError
from .model import loss_fn
from .pretokenize import PreTokenizerSpec, pretokenize
from .vocab import Vocabulary, encode


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    valid_loss: float
    valid_accuracy: float


@dataclass
class TrainingHistory:
    epochs: list[EpochStats]
    best_epoch: int
    best_valid_accuracy: float

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.epochs:
                fh.write(json.dumps(asdict(rec)) + "\n")

    def to_dict(self) -> dict:
        return {
            "epochs": [asdict(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_valid_accuracy": self.best_valid_accuracy,
        }


@dataclass
class EncodedSplit:
    """A dataset split encoded for the transformer: fixed-length id rows."""
    ids: torch.Tensor       # (N, T) int64
    lengths: torch.Tensor   # (N,) int64, pre-padding lengths
    labels: torch.Tensor    # (N,) int64

    def __len__(self) -> int:
        return self.ids.shape[0]


def tokenize_samples(samples: list[LogSample], spec: PreTokenizerSpec) -> list[list[str]]:
    return [pretokenize(s.text, spec) for s in samples]


def labels_tensor(samples: list[LogSample]) -> torch.Tensor:
    return torch.tensor([CLASS_INDEX[s.label] for s in samples], dtype=torch.long)


def encode_split(
    samples: list[LogSample],
    spec: PreTokenizerSpec,
    vocab: Vocabulary,
    seq_len: int,
    token_lists: list[list[str]] | None = None,
) -> EncodedSplit:
    if token_lists is None:
        token_lists = tokenize_samples(samples, spec)
    rows, lengths = [], []
    for tokens in token_lists:
        seq = encode(tokens, vocab, seq_len)
        rows.append(seq.ids)
        lengths.append(seq.true_length)
    return EncodedSplit(
        ids=torch.tensor(rows, dtype=torch.long),
        lengths=torch.tensor(lengths, dtype=torch.long),
        labels=labels_tensor(samples),
    )


BatchFn = Callable[[torch.Tensor], torch.Tensor]
# maps a tensor of example indices to the model's input batch


@torch.no_grad()
def evaluate_model(
    model: torch.nn.Module,
    make_batch: BatchFn,
    labels: torch.Tensor,
    batch_size: int,
) -> tuple[float, float]:
    """Mean loss and accuracy of ``model`` over a whole split."""
    model.eval()
    n = labels.shape[0]
    total_loss = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        idx = torch.arange(start, min(start + batch_size, n))
        probs = model(make_batch(idx))
        batch_labels = labels[idx]
        total_loss += float(loss_fn(probs, batch_labels)) * len(idx)
        correct += int((probs.argmax(dim=1) == batch_labels).sum())
    return total_loss / n, correct / n


def fit(
    model: torch.nn.Module,
    config: ModelConfig,
    train_batch: BatchFn,
    train_labels: torch.Tensor,
    valid_batch: BatchFn,
    valid_labels: torch.Tensor,
    log: Callable[[str], None] | None = None,
) -> TrainingHistory:
    """Train ``model`` in place; returns the per-epoch history.

    The model is left holding the parameters of the best-validation epoch.
    """
    if train_labels.numel() == 0 or valid_labels.numel() == 0:
        raise ConfigurationError("training and validation sets must be non-empty")

    torch.manual_seed(config.seed)
    shuffle_rng = np.random.default_rng(config.seed)
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=config.learning_rate,
        betas=(0.9, 0.999),
        weight_decay=config.weight_decay,
    )

    n = train_labels.shape[0]
    best_state: dict | None = None
    best_acc = -1.0
    best_epoch = -1
    epochs_without_improvement = 0
    history: list[EpochStats] = []
    step = 0

    for epoch in range(config.max_epochs):
        model.train()
        order = torch.from_numpy(shuffle_rng.permutation(n))
        epoch_loss = 0.0
        epoch_correct = 0
        for batch_no, start in enumerate(range(0, n, config.batch_size)):
            if config.warmup_steps > 0:
                scale = min(1.0, (step + 1) / config.warmup_steps)
                for group in optimizer.param_groups:
                    group["lr"] = config.learning_rate * scale
            step += 1
            idx = order[start : start + config.batch_size]
            probs = model(train_batch(idx))
            loss = loss_fn(probs, train_labels[idx])
            if not torch.isfinite(loss):
                raise NumericalDivergenceError(
                    f"non-finite training loss at epoch {epoch} batch {batch_no}"
                )
            optimizer.zero_grad()
            loss.backward()
            if config.grad_clip > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), config.grad_clip)
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            epoch_correct += int((probs.argmax(dim=1) == train_labels[idx]).sum())

        valid_loss, valid_acc = evaluate_model(
            model, valid_batch, valid_labels, config.batch_size
        )
        stats = EpochStats(
            epoch=epoch,
            train_loss=epoch_loss / n,
            train_accuracy=epoch_correct / n,
            valid_loss=valid_loss,
            valid_accuracy=valid_acc,
        )
        history.append(stats)
        if log:
            log(
                f"epoch {epoch}: train_loss={stats.train_loss:.4f} "
                f"train_acc={stats.train_accuracy:.3f} valid_loss={valid_loss:.4f} "
                f"valid_acc={valid_acc:.3f}"
            )

        if valid_acc > best_acc:
            best_acc = valid_acc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= config.patience > 0:
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    return TrainingHistory(
        epochs=history, best_epoch=best_epoch, best_valid_accuracy=best_acc
    )


def ids_batcher(split: EncodedSplit) -> BatchFn:
    return lambda idx: split.ids[idx]


def train_transformer(
    train_split: EncodedSplit,
    valid_split: EncodedSplit,
    vocab: Vocabulary,
    config: ModelConfig,
    log: Callable[[str], None] | None = None,
):
    """Build, initialize, and train a transformer; returns (model, history)."""
    from .model import TransformerClassifier

    model = TransformerClassifier(config, vocab.size)
    history = fit(
        model,
        config,
        ids_batcher(train_split),
        train_split.labels,
        ids_batcher(valid_split),
        valid_split.labels,
        log=log,
    )
    return model, history
