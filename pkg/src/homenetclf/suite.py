"""The seven-configuration comparison suite.

Cases: transformer with greedy digit splitting for k in 1..4, transformer
with whitespace splitting, and the bag-of-words model with greedy-3 and with
whitespace splitting.  All cases share the same dataset and seed; digit
splitting runs at sequence length 512 and whitespace at 1024.

Training uses a desk-scale protocol (few epochs, a learning rate suited to a
corpus of thousands rather than hundreds of thousands of samples) so the
whole suite finishes on a CPU in well under half an hour.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import torch

from .baseline import bow_train, multi_hot_batcher, present_ids
from .checkpoint import save_checkpoint
from .config import SEQ_LEN_DIGITS, SEQ_LEN_WHITESPACE, ModelConfig
from .datagen import CLASS_NAMES, LogSample
from .errors import NumericalDivergenceError
from .evaluation import ConfusionMatrix, MetricsReport, comparison_table, confusion, metrics
from .pretokenize import PreTokenizerKind, PreTokenizerSpec
from .train import (
    TrainingHistory,
    encode_split,
    labels_tensor,
    tokenize_samples,
    train_transformer,
)
from .vocab import Vocabulary, build_vocabulary


@dataclass
class SuiteConfig:
    seed: int = 7
    digit_ks: tuple[int, ...] = (1, 2, 3, 4)
    bow_digit_k: int = 3
    seq_len_digits: int = SEQ_LEN_DIGITS
    seq_len_whitespace: int = SEQ_LEN_WHITESPACE
    min_frequency: int = 1
    # Desk-scale training protocol, shared by all seven cases.
    transformer_learning_rate: float = 5e-4
    transformer_epochs: int = 3
    bow_learning_rate: float = 5e-3
    bow_epochs: int = 20
    batch_size: int = 32
    patience: int = 10
    dropout: float = 0.1


@dataclass
class SuiteCaseResult:
    case_id: str
    report: MetricsReport | None
    confusion: ConfusionMatrix | None
    history: TrainingHistory | None
    train_seconds: float
    error: str | None = None


@dataclass
class SuiteResult:
    cases: list[SuiteCaseResult]
    table: str
    total_seconds: float

    def report(self, case_id: str) -> MetricsReport:
        for case in self.cases:
            if case.case_id == case_id and case.report is not None:
                return case.report
        raise KeyError(case_id)


def _case_specs(cfg: SuiteConfig) -> list[tuple[str, str, PreTokenizerSpec, int]]:
    cases: list[tuple[str, str, PreTokenizerSpec, int]] = []
    for k in cfg.digit_ks:
        spec = PreTokenizerSpec(PreTokenizerKind.GREEDY_K_DIGITS, k)
        cases.append((f"transformer-greedy{k}", "transformer", spec, cfg.seq_len_digits))
    ws = PreTokenizerSpec(PreTokenizerKind.WHITESPACE)
    cases.append(("transformer-whitespace", "transformer", ws, cfg.seq_len_whitespace))
    bow_spec = PreTokenizerSpec(PreTokenizerKind.GREEDY_K_DIGITS, cfg.bow_digit_k)
    cases.append((f"bow-greedy{cfg.bow_digit_k}", "bow", bow_spec, cfg.seq_len_digits))
    cases.append(("bow-whitespace", "bow", ws, cfg.seq_len_whitespace))
    return cases


@torch.no_grad()
def _predict_all(model: torch.nn.Module, make_batch, n: int, batch_size: int) -> list[int]:
    model.eval()
    preds: list[int] = []
    for start in range(0, n, batch_size):
        idx = torch.arange(start, min(start + batch_size, n))
        preds.extend(model(make_batch(idx)).argmax(dim=1).tolist())
    return preds


def run_suite(
    train_samples: list[LogSample],
    valid_samples: list[LogSample],
    test_samples: list[LogSample],
    suite_cfg: SuiteConfig | None = None,
    out_dir: str | Path | None = None,
    log: Callable[[str], None] | None = None,
) -> SuiteResult:
    cfg = suite_cfg or SuiteConfig()
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    def say(msg: str) -> None:
        if log:
            log(msg)

    started = time.time()
    token_cache: dict = {}

    def tokens_for(spec: PreTokenizerSpec):
        key = (spec.kind, spec.k if spec.kind is PreTokenizerKind.GREEDY_K_DIGITS else None)
        if key not in token_cache:
            token_cache[key] = (
                tokenize_samples(train_samples, spec),
                tokenize_samples(valid_samples, spec),
                tokenize_samples(test_samples, spec),
            )
        return token_cache[key]

    vocab_cache: dict = {}

    def vocab_for(spec: PreTokenizerSpec) -> Vocabulary:
        key = (spec.kind, spec.k if spec.kind is PreTokenizerKind.GREEDY_K_DIGITS else None)
        if key not in vocab_cache:
            train_tokens, _, _ = tokens_for(spec)
            vocab_cache[key] = build_vocabulary(train_tokens, cfg.min_frequency)
        return vocab_cache[key]

    test_labels = labels_tensor(test_samples).tolist()
    results: list[SuiteCaseResult] = []

    for case_id, model_kind, spec, seq_len in _case_specs(cfg):
        say(f"[{case_id}] tokenizing with {spec.describe()}")
        train_tokens, valid_tokens, test_tokens = tokens_for(spec)
        vocab = vocab_for(spec)
        say(f"[{case_id}] vocabulary size {vocab.size}")
        case_start = time.time()
        try:
            if model_kind == "transformer":
                config = ModelConfig(
                    seq_len=seq_len,
                    learning_rate=cfg.transformer_learning_rate,
                    max_epochs=cfg.transformer_epochs,
                    batch_size=cfg.batch_size,
                    patience=cfg.patience,
                    dropout=cfg.dropout,
                    seed=cfg.seed,
                )
                enc_train = encode_split(train_samples, spec, vocab, seq_len, train_tokens)
                enc_valid = encode_split(valid_samples, spec, vocab, seq_len, valid_tokens)
                model, history = train_transformer(
                    enc_train, enc_valid, vocab, config,
                    log=(lambda m: say(f"[{case_id}] {m}")) if log else None,
                )
                enc_test = encode_split(test_samples, spec, vocab, seq_len, test_tokens)
                preds = _predict_all(
                    model, lambda idx: enc_test.ids[idx], len(test_samples), cfg.batch_size
                )
            else:
                config = ModelConfig(
                    seq_len=seq_len,
                    learning_rate=cfg.bow_learning_rate,
                    max_epochs=cfg.bow_epochs,
                    batch_size=cfg.batch_size,
                    patience=cfg.patience,
                    seed=cfg.seed,
                )
                model, history = bow_train(
                    train_tokens, labels_tensor(train_samples),
                    valid_tokens, labels_tensor(valid_samples),
                    vocab, config,
                    log=(lambda m: say(f"[{case_id}] {m}")) if log else None,
                )
                test_docs = [present_ids(toks, vocab) for toks in test_tokens]
                preds = _predict_all(
                    model, multi_hot_batcher(test_docs, vocab.size),
                    len(test_samples), cfg.batch_size,
                )
        except NumericalDivergenceError as exc:
            say(f"[{case_id}] diverged: {exc}")
            results.append(SuiteCaseResult(
                case_id=case_id, report=None, confusion=None, history=None,
                train_seconds=time.time() - case_start, error=str(exc),
            ))
            continue

        cm = confusion(preds, test_labels, CLASS_NAMES)
        report = metrics(cm, test_case_id=case_id)
        elapsed = time.time() - case_start
        say(f"[{case_id}] test accuracy {report.accuracy:.4f} ({elapsed:.0f}s)")
        results.append(SuiteCaseResult(
            case_id=case_id, report=report, confusion=cm, history=history,
            train_seconds=elapsed,
        ))

        if out is not None:
            report.save(out / f"{case_id}.report.json")
            cm.save_csv(out / f"{case_id}.confusion.csv")
            history.save(out / f"{case_id}.history.jsonl")
            vocab.save(out / f"{case_id}.vocab.txt")
            save_checkpoint(out / f"{case_id}.ckpt", model, spec, vocab)

    table = comparison_table([c.report for c in results if c.report is not None])
    total = time.time() - started
    result = SuiteResult(cases=results, table=table, total_seconds=total)

    if out is not None:
        (out / "comparison.txt").write_text(table, encoding="utf-8")
        summary = {
            "total_seconds": total,
            "cases": [
                {
                    "case_id": c.case_id,
                    "accuracy": c.report.accuracy if c.report else None,
                    "train_seconds": c.train_seconds,
                    "error": c.error,
                }
                for c in results
            ],
        }
        with open(out / "suite.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return result
