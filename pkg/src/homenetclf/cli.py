"""Command-line interface.

Subcommands: generate, build-vocab, train, evaluate, suite, classify,
pretokenize.  A JSON config file can supply any long-flag value (without the
leading dashes, dashes replaced by underscores); explicit flags win over the
file.  Exit codes: 0 success, 1 usage error, 2 data/IO error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .baseline import bow_predict, bow_train
from .checkpoint import load_checkpoint, save_checkpoint
from .config import (
    BOW_LEARNING_RATE,
    SEQ_LEN_DIGITS,
    SEQ_LEN_WHITESPACE,
    ModelConfig,
)
from .datagen import CLASS_NAMES, load_samples, load_splits, write_dataset
from .errors import (
    ConfigurationError,
    DataFormatError,
    GenerationError,
    NumericalDivergenceError,
)
from .evaluation import confusion, metrics
from .model import predict
from .pretokenize import PreTokenizerKind, PreTokenizerSpec, pretokenize
from .suite import SuiteConfig, run_suite
from .train import encode_split, labels_tensor, tokenize_samples, train_transformer
from .vocab import Vocabulary, build_vocabulary

DATA_DIR_ENV = "HOMENETCLF_DATA_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this project reserves 2 for
    # data errors, so remap.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, "data")


def _tokenizer_spec(args: argparse.Namespace) -> PreTokenizerSpec:
    if args.pretokenizer == "whitespace":
        return PreTokenizerSpec(PreTokenizerKind.WHITESPACE)
    return PreTokenizerSpec(PreTokenizerKind.GREEDY_K_DIGITS, args.k)


def _read_text_arg(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _add_tokenizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pretokenizer", choices=["greedy", "whitespace"], default="greedy",
                   help="pre-tokenizer rule (default: greedy)")
    p.add_argument("--k", type=int, default=3, help="digits per chunk for greedy splitting")


def build_parser() -> _Parser:
    parser = _Parser(prog="homenetclf",
                     description="Home network fault classification toolkit")
    parser.add_argument("--version", action="version", version=f"homenetclf {__version__}")
    parser.add_argument("--config", default=None,
                        help="JSON file with default values for any flag")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="generate a synthetic labeled dataset")
    p.add_argument("--per-class", type=int, required=True,
                   help="samples to generate per problem class")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", default=None, help=f"output directory (default ${DATA_DIR_ENV} or ./data)")
    p.add_argument("--split", default="0.7,0.15,0.15",
                   help="train,valid,test fractions (default 0.7,0.15,0.15)")

    p = sub.add_parser("build-vocab", help="build a vocabulary from the train split")
    p.add_argument("--data-dir", default=None)
    _add_tokenizer_flags(p)
    p.add_argument("--min-frequency", type=int, default=1)
    p.add_argument("--out", required=True, help="vocabulary file to write")

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--model", choices=["transformer", "bow"], default="transformer")
    _add_tokenizer_flags(p)
    p.add_argument("--vocab", default=None,
                   help="existing vocabulary file (default: build from train split)")
    p.add_argument("--seq-len", type=int, default=None,
                   help="sequence length (default 512 greedy / 1024 whitespace)")
    p.add_argument("--learning-rate", type=float, default=None,
                   help="default 1e-5 transformer / 1e-4 bow")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default="run")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--split", choices=["train", "valid", "test"], default="test")
    p.add_argument("--out-dir", default=None, help="write report.json and confusion.csv here")
    p.add_argument("--test-case-id", default=None)

    p = sub.add_parser("suite", help="run the seven-configuration comparison suite")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--out-dir", default="suite-out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--transformer-epochs", type=int, default=None)
    p.add_argument("--transformer-lr", type=float, default=None)
    p.add_argument("--bow-epochs", type=int, default=None)
    p.add_argument("--bow-lr", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("classify", help="classify one log text")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("input", help="log text file, or - for stdin")

    p = sub.add_parser("pretokenize", help="show the token split of a text")
    _add_tokenizer_flags(p)
    p.add_argument("input", help="text file, or - for stdin")

    return parser


def _apply_config_file(argv: list[str]) -> list[str]:
    """Layer --config file values under the flags; explicit flags win."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return argv
    path = argv[at + 1]
    try:
        values = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataFormatError(f"cannot read config file: {exc}") from exc
    except ValueError as exc:
        raise DataFormatError(f"bad config file {path}: {exc}") from exc
    if not isinstance(values, dict):
        raise DataFormatError(f"bad config file {path}: expected a JSON object")
    out = list(argv)
    for key, value in values.items():
        flag = "--" + str(key).replace("_", "-")
        if any(a == flag or a.startswith(flag + "=") for a in argv):
            continue  # flag given explicitly, it wins
        if isinstance(value, bool):
            if value:
                out.append(flag)
        else:
            out.extend([flag, str(value)])
    return out


def _resolve_data_dir(args: argparse.Namespace) -> Path:
    raw = getattr(args, "data_dir", None) or _default_data_dir()
    path = Path(raw)
    if not path.exists():
        raise DataFormatError(f"data directory {path} does not exist")
    return path


def cmd_generate(args: argparse.Namespace) -> int:
    out_dir = args.out_dir or _default_data_dir()
    try:
        fractions = tuple(float(f) for f in args.split.split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad --split value {args.split!r}: {exc}") from exc
    manifest = write_dataset(out_dir, args.per_class, args.seed, fractions)  # type: ignore[arg-type]
    counts = manifest["counts"]
    print(
        f"wrote {counts['train']}/{counts['valid']}/{counts['test']} "
        f"train/valid/test samples to {out_dir}"
    )
    return EXIT_OK


def cmd_build_vocab(args: argparse.Namespace) -> int:
    data_dir = _resolve_data_dir(args)
    spec = _tokenizer_spec(args)
    train_samples = load_samples(data_dir / "train.jsonl")
    vocab = build_vocabulary(tokenize_samples(train_samples, spec), args.min_frequency)
    vocab.save(args.out)
    print(f"vocabulary of {vocab.size} tokens written to {args.out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    data_dir = _resolve_data_dir(args)
    spec = _tokenizer_spec(args)
    train_samples, valid_samples, _ = load_splits(data_dir)

    default_seq = SEQ_LEN_WHITESPACE if args.pretokenizer == "whitespace" else SEQ_LEN_DIGITS
    default_lr = BOW_LEARNING_RATE if args.model == "bow" else None
    config = ModelConfig(seq_len=default_seq,
                         **({"learning_rate": default_lr} if default_lr else {}))
    config = config.with_overrides(
        seq_len=args.seq_len,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        patience=args.patience,
        dropout=args.dropout,
        seed=args.seed,
    )

    train_tokens = tokenize_samples(train_samples, spec)
    if args.vocab:
        vocab = Vocabulary.load(args.vocab)
    else:
        vocab = build_vocabulary(train_tokens)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.model == "transformer":
        enc_train = encode_split(train_samples, spec, vocab, config.seq_len, train_tokens)
        enc_valid = encode_split(valid_samples, spec, vocab, config.seq_len)
        model, history = train_transformer(enc_train, enc_valid, vocab, config, log=print)
    else:
        model, history = bow_train(
            train_tokens, labels_tensor(train_samples),
            tokenize_samples(valid_samples, spec), labels_tensor(valid_samples),
            vocab, config, log=print,
        )

    vocab_path = out_dir / "vocab.txt"
    ckpt_path = out_dir / "model.ckpt"
    vocab.save(vocab_path)
    save_checkpoint(ckpt_path, model, spec, vocab)
    history.save(out_dir / "history.jsonl")
    # self-validation: the checkpoint must load back cleanly
    load_checkpoint(ckpt_path, vocab)
    print(
        f"saved checkpoint to {ckpt_path} "
        f"(best epoch {history.best_epoch}, valid accuracy {history.best_valid_accuracy:.4f})"
    )
    return EXIT_OK


def _evaluate_checkpoint(args: argparse.Namespace, samples, case_id: str):
    import torch

    vocab = Vocabulary.load(args.vocab)
    model, spec = load_checkpoint(args.checkpoint, vocab)
    labels = labels_tensor(samples).tolist()
    preds = []
    if hasattr(model, "blocks"):  # transformer
        enc = encode_split(samples, spec, vocab, model.config.seq_len)
        with torch.no_grad():
            for start in range(0, len(samples), model.config.batch_size):
                batch = enc.ids[start : start + model.config.batch_size]
                preds.extend(model(batch).argmax(dim=1).tolist())
    else:
        for s in samples:
            _, top = bow_predict(pretokenize(s.text, spec), vocab, model)
            preds.append(top)
    cm = confusion(preds, labels, CLASS_NAMES)
    return metrics(cm, test_case_id=case_id), cm


def cmd_evaluate(args: argparse.Namespace) -> int:
    data_dir = _resolve_data_dir(args)
    samples = load_samples(data_dir / f"{args.split}.jsonl")
    case_id = args.test_case_id or f"{Path(args.checkpoint).stem}-{args.split}"
    report, cm = _evaluate_checkpoint(args, samples, case_id)
    print(f"accuracy: {report.accuracy:.4f} on {report.total} samples")
    for row in report.per_class:
        prec = "n/a" if row.precision is None else f"{row.precision:.2f}"
        rec = "n/a" if row.recall is None else f"{row.recall:.2f}"
        print(f"  {row.name:<24} precision {prec:>5}  recall {rec:>5}  support {row.support}")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.save(out / "report.json")
        cm.save_csv(out / "confusion.csv")
        print(f"report written to {out}")
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    data_dir = _resolve_data_dir(args)
    train_samples, valid_samples, test_samples = load_splits(data_dir)
    cfg = SuiteConfig()
    overrides = {
        "seed": args.seed,
        "transformer_epochs": args.transformer_epochs,
        "transformer_learning_rate": args.transformer_lr,
        "bow_epochs": args.bow_epochs,
        "bow_learning_rate": args.bow_lr,
        "batch_size": args.batch_size,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    result = run_suite(
        train_samples, valid_samples, test_samples,
        suite_cfg=cfg, out_dir=args.out_dir,
        log=None if args.quiet else print,
    )
    print(result.table)
    failed = [c.case_id for c in result.cases if c.error]
    if failed:
        print(f"diverged cases: {', '.join(failed)}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"suite finished in {result.total_seconds:.0f}s; reports in {args.out_dir}")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    text = _read_text_arg(args.input)
    vocab = Vocabulary.load(args.vocab)
    model, spec = load_checkpoint(args.checkpoint, vocab)
    if hasattr(model, "blocks"):
        probs, top = predict(text, spec, vocab, model)
    else:
        probs, top = bow_predict(pretokenize(text, spec), vocab, model)
    probs_list = [float(p) for p in probs]
    if args.json:
        print(json.dumps({
            "top_class": CLASS_NAMES[top],
            "probabilities": dict(zip(CLASS_NAMES, probs_list)),
        }))
    else:
        print(f"top class: {CLASS_NAMES[top]}")
        for name, p in sorted(zip(CLASS_NAMES, probs_list), key=lambda x: -x[1]):
            print(f"  {name:<24} {p:.4f}")
    return EXIT_OK


def cmd_pretokenize(args: argparse.Namespace) -> int:
    text = _read_text_arg(args.input)
    for token in pretokenize(text, _tokenizer_spec(args)):
        print(json.dumps(token, ensure_ascii=False))
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "build-vocab": cmd_build_vocab,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "suite": cmd_suite,
    "classify": cmd_classify,
    "pretokenize": cmd_pretokenize,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, GenerationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
